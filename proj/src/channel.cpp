#include "mdiqkd/channel.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "mdiqkd/common.hpp"

namespace mdiqkd {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
// Phase lags decorrelate the three sinusoids from each other while keeping
// them driven by the common temperature proxy.
constexpr double kPolPhaseLag = 1.9;
constexpr double kFreqPhaseLag = 4.1;

double reflect_unit(double x) {
    // fold into [0,1] with reflecting boundaries (period-2 sawtooth)
    x = std::fabs(x);
    x = std::fmod(x, 2.0);
    return x > 1.0 ? 2.0 - x : x;
}

std::uint64_t state_hash(const DriftState& s, std::uint64_t seed) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ std::bit_cast<std::uint64_t>(s.time_s));
    return h;
}

}  // namespace

void FiberLink::validate() const {
    if (!(length_km >= 0.0))
        throw config_error("fiber length_km must be >= 0");
    if (!(loss_db >= 0.0))
        throw config_error("fiber loss_db must be >= 0");
}

double transmittance(const FiberLink& link) {
    link.validate();
    return std::pow(10.0, -link.loss_db / 10.0);
}

void DriftParams::validate() const {
    if (!(temp_period_s > 0.0))
        throw config_error("temp_period_s must be > 0");
    if (!(pulse_fwhm_ps > 0.0))
        throw config_error("pulse_fwhm_ps must be > 0");
    if (timing_sine_amp_ps < 0.0 || timing_walk_ps_per_sqrt_s < 0.0 ||
        pol_sine_amp < 0.0 || pol_walk_per_sqrt_s < 0.0 ||
        freq_rate_cap_mhz_per_hour < 0.0)
        throw config_error("drift amplitudes must be >= 0");
}

bool DriftParams::all_zero() const {
    return timing_sine_amp_ps == 0.0 && timing_walk_ps_per_sqrt_s == 0.0 &&
           pol_sine_amp == 0.0 && pol_walk_per_sqrt_s == 0.0 &&
           freq_rate_cap_mhz_per_hour == 0.0;
}

DriftState make_initial_drift_state(const DriftParams& params, std::uint64_t seed) {
    params.validate();
    DriftState s;
    s.temperature_phase = kTwoPi * hash_to_unit(splitmix64(seed ^ 0x7d31f5a2c8e90b64ULL));
    return s;
}

DriftState step_drift(const DriftState& state, double dt_s,
                      const DriftParams& params, std::uint64_t seed) {
    if (!(dt_s > 0.0)) throw std::invalid_argument("step_drift requires dt > 0");
    params.validate();

    DriftState next = state;
    next.time_s = state.time_s + dt_s;
    const double omega = kTwoPi / params.temp_period_s;
    next.temperature_phase = state.temperature_phase + omega * dt_s;

    std::mt19937_64 rng(state_hash(state, seed));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sqrt_dt = std::sqrt(dt_s);

    const double dsin = std::sin(next.temperature_phase) - std::sin(state.temperature_phase);
    next.delta_t_ps = state.delta_t_ps + params.timing_sine_amp_ps * dsin +
                      params.timing_walk_ps_per_sqrt_s * sqrt_dt * gauss(rng);

    const double dsin_pol = std::sin(next.temperature_phase + kPolPhaseLag) -
                            std::sin(state.temperature_phase + kPolPhaseLag);
    next.pol_overlap = reflect_unit(state.pol_overlap + params.pol_sine_amp * dsin_pol +
                                    params.pol_walk_per_sqrt_s * sqrt_dt * gauss(rng));

    // Bounded-slope frequency drift correlated with temperature: |dnu/dt| is
    // capped, so any one-hour window moves by at most the configured cap.
    const double rate = params.freq_rate_cap_mhz_per_hour / 3600.0;
    const double mid_phase = 0.5 * (state.temperature_phase + next.temperature_phase);
    next.delta_nu_mhz = state.delta_nu_mhz + rate * dt_s * std::sin(mid_phase + kFreqPhaseLag);

    return next;
}

void StabilizerConfig::validate() const {
    if (!(pol_period_s > 0.0 && timing_period_s > 0.0 && freq_worstcase_period_s > 0.0))
        throw config_error("stabilizer periods must be > 0");
    if (!(pol_holdoff_s > 0.0 && pol_holdoff_s < pol_period_s))
        throw config_error("pol_holdoff_s must lie in (0, pol_period_s)");
    if (!(timing_residual_bound_ps > 0.0))
        throw config_error("timing_residual_bound_ps must be > 0");
    if (!(freq_threshold_mhz > 0.0))
        throw config_error("freq_threshold_mhz must be > 0");
}

double duty_fraction(const StabilizerConfig& config) {
    if (!config.enabled) return 1.0;
    config.validate();
    return 1.0 - config.pol_holdoff_s / config.pol_period_s;
}

StabilizerResult apply_stabilizers(const DriftState& state,
                                   const StabilizerConfig& config, double dt_s) {
    StabilizerResult result;
    result.state = state;
    if (!config.enabled) {
        result.duty_fraction = 1.0;
        return result;
    }
    config.validate();
    if (!(dt_s > 0.0)) throw std::invalid_argument("apply_stabilizers requires dt > 0");
    result.duty_fraction = duty_fraction(config);

    const double t = state.time_s;
    const auto crossed = [&](double period) {
        return std::floor(t / period) > std::floor((t - dt_s) / period);
    };

    if (crossed(config.pol_period_s)) {
        result.state.pol_overlap = 1.0;
        result.pol_corrected = true;
    }
    if (crossed(config.timing_period_s)) {
        // deterministic pseudo-uniform residual in +-bound, keyed on the
        // incoming state and the correction index
        const auto idx = static_cast<std::uint64_t>(std::floor(t / config.timing_period_s));
        std::uint64_t h = splitmix64(std::bit_cast<std::uint64_t>(state.delta_t_ps) ^
                                     splitmix64(idx + 0x9027ba3175c3efd1ULL));
        result.state.delta_t_ps = (2.0 * hash_to_unit(h) - 1.0) * config.timing_residual_bound_ps;
        result.timing_corrected = true;
    }
    if (std::fabs(state.delta_nu_mhz) > config.freq_threshold_mhz) {
        result.state.delta_nu_mhz = 0.0;
        result.freq_corrected = true;
    }
    return result;
}

DistinguishabilityParams drift_to_distinguishability(const DriftState& state,
                                                     const DriftParams& params) {
    DistinguishabilityParams d;
    d.time_offset_ps = state.delta_t_ps;
    d.pulse_fwhm_ps = params.pulse_fwhm_ps;
    d.polarization_overlap = state.pol_overlap;
    d.frequency_detuning_mhz = state.delta_nu_mhz;
    return d;
}

DriftTimeSeries simulate_drift(const DriftParams& params,
                               const StabilizerConfig& stabilizer,
                               double duration_s, double dt_s,
                               std::uint64_t seed) {
    if (!(duration_s > 0.0) || !(dt_s > 0.0) || dt_s > duration_s)
        throw config_error("drift simulation requires 0 < dt <= duration");

    DriftTimeSeries series;
    series.duty_fraction = duty_fraction(stabilizer);
    DriftState state = make_initial_drift_state(params, seed);
    const auto steps = static_cast<std::size_t>(std::ceil(duration_s / dt_s));
    series.samples.reserve(steps + 1);

    DriftSample first;
    first.state = state;
    first.mode_overlap = mode_overlap(drift_to_distinguishability(state, params));
    series.samples.push_back(first);

    for (std::size_t i = 0; i < steps; ++i) {
        state = step_drift(state, dt_s, params, seed);
        const StabilizerResult corr = apply_stabilizers(state, stabilizer, dt_s);
        state = corr.state;
        DriftSample sample;
        sample.state = state;
        sample.mode_overlap = mode_overlap(drift_to_distinguishability(state, params));
        sample.pol_corrected = corr.pol_corrected;
        sample.timing_corrected = corr.timing_corrected;
        sample.freq_corrected = corr.freq_corrected;
        series.samples.push_back(sample);
    }
    return series;
}

}  // namespace mdiqkd
