#pragma once

#include <cstdint>
#include <vector>

#include "mdiqkd/optics.hpp"

namespace mdiqkd {

struct FiberLink {
    double length_km = 0.0;
    double loss_db = 0.0;

    void validate() const;
};

// 10^(-loss/10), in (0, 1].
double transmittance(const FiberLink& link);

// Instantaneous state of the slowly varying channel properties that degrade
// two-photon indistinguishability at the measurement node.
struct DriftState {
    double time_s = 0.0;
    double delta_t_ps = 0.0;       // differential arrival time
    double pol_overlap = 1.0;      // field-amplitude polarization overlap
    double delta_nu_mhz = 0.0;     // laser frequency difference
    double temperature_phase = 0.0;  // latent driver of the correlated slow drift
};

// Stochastic drift law: a slow sinusoid driven by temperature_phase plus a
// bounded random walk per quantity. Amplitudes default to the scale of the
// observed traces (tens of ps and tens of percent polarization overlap over
// tens of minutes; frequency difference capped at 20 MHz per hour).
struct DriftParams {
    double temp_period_s = 1200.0;
    double timing_sine_amp_ps = 30.0;
    double timing_walk_ps_per_sqrt_s = 2.0;
    double pol_sine_amp = 0.15;
    double pol_walk_per_sqrt_s = 0.02;
    double freq_rate_cap_mhz_per_hour = 20.0;
    double pulse_fwhm_ps = 500.0;  // pulse shape used to convert drift to overlap

    void validate() const;
    bool all_zero() const;
};

DriftState make_initial_drift_state(const DriftParams& params, std::uint64_t seed);

// Advances the state by dt seconds. Pure: deterministic per (state, seed),
// all evolving quantities live in DriftState.
DriftState step_drift(const DriftState& state, double dt_s,
                      const DriftParams& params, std::uint64_t seed);

// The three feedback loops: polarization reset every pol_period (costing a
// holdoff dead window), arrival-time correction every timing_period to a
// uniform residual within +-timing_residual_bound, and frequency correction
// whenever |delta_nu| exceeds freq_threshold.
struct StabilizerConfig {
    bool enabled = true;
    double pol_period_s = 10.0;
    double pol_holdoff_s = 0.5;
    double timing_period_s = 60.0;
    double timing_residual_bound_ps = 30.0;
    double freq_threshold_mhz = 10.0;
    double freq_worstcase_period_s = 1800.0;

    void validate() const;
};

// Fraction of wall-clock time available for key data: 1 - holdoff/period
// (1 when disabled). Independent of seeds.
double duty_fraction(const StabilizerConfig& config);

struct StabilizerResult {
    DriftState state;
    double duty_fraction = 1.0;
    bool pol_corrected = false;
    bool timing_corrected = false;
    bool freq_corrected = false;
};

// Applies the corrections due in the interval (state.time_s - dt_s,
// state.time_s]. Call once per simulation step, after step_drift.
StabilizerResult apply_stabilizers(const DriftState& state,
                                   const StabilizerConfig& config, double dt_s);

DistinguishabilityParams drift_to_distinguishability(const DriftState& state,
                                                     const DriftParams& params);

// One row of a drift time series, with the overlap the optics would see and
// flags marking correction events.
struct DriftSample {
    DriftState state;
    double mode_overlap = 1.0;
    bool pol_corrected = false;
    bool timing_corrected = false;
    bool freq_corrected = false;
};

struct DriftTimeSeries {
    std::vector<DriftSample> samples;
    double duty_fraction = 1.0;
};

// Simulates drift for `duration_s` at step `dt_s`, with or without the
// stabilizers. Deterministic per seed.
DriftTimeSeries simulate_drift(const DriftParams& params,
                               const StabilizerConfig& stabilizer,
                               double duration_s, double dt_s,
                               std::uint64_t seed);

}  // namespace mdiqkd
