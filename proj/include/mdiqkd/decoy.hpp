#pragma once

#include <cstdint>

#include "mdiqkd/table.hpp"

namespace mdiqkd {

// Probability that both parties choose the key basis in one gate when bases
// are picked independently at 50/50; converts fixed-basis gains into
// bits-per-gate rates of the randomized protocol.
inline constexpr double kBasisSiftFactor = 0.25;

// Poisson photon-number distribution P_n(mu) = e^(-mu) mu^n / n!.
double poisson_pn(double mu, int n);

// Binary entropy, -x log2 x - (1-x) log2 (1-x), with h2(0) = h2(1) = 0.
double binary_entropy(double x);

enum class Q0Which { Decoy, Signal };

// Vacuum-contribution term of the single-photon bound:
//   Q0(mu) = P0(mu) (Q_v. + Q_.v) - P0(mu)^2 Q_vv
// with '.' the decoy or signal column per `which`.
double q0_term(Basis basis, Q0Which which, const GainErrorTable& table);

struct BoundValue {
    double value = 0.0;
    bool clamped = false;  // raw bound was negative and clamped to 0
};

// Lower bound on the single-photon yield Y11 (probability of a psi-minus
// projection given both parties emit exactly one photon), from the
// three-intensity construction:
//   Y11 >= [P1(s)P2(s)(Q_dd - Q0(mu_d)) - P1(d)P2(d)(Q_ss - Q0(mu_s))]
//          / [P1(s)P1(d)(P1(d)P2(s) - P1(s)P2(d))]
// Negative results clamp to 0 with a flag. Throws when the denominator is
// not positive (requires mu_signal > mu_decoy > 0).
BoundValue y11_lower_bound(Basis basis, const GainErrorTable& table);

// Lower bound on the single-photon gain within signal-signal pulses,
//   Q11 = P1(mu_s)^2 * Y11.
BoundValue q11_lower_bound(Basis basis, const GainErrorTable& table);

// Upper bound on the single-photon error rate in the x basis:
//   e11 <= [e_dd Q_dd - P0(d) e_vd Q_vd - P0(d) e_dv Q_dv + P0(d)^2 e_vv Q_vv]
//          / [P1(d)^2 Y11_x]
// where Y11_x = q11_x_lower / P1(mu_s)^2. Valid as an upper bound because a
// lower bound enters the denominator. Throws when q11_x_lower <= 0.
double e11_upper_bound(const GainErrorTable& table, double q11_x_lower);

struct DecoyBounds {
    double q11_z_lower = 0.0;
    double q11_x_lower = 0.0;
    double e11_x_upper = 0.0;
    bool q11_z_clamped = false;
    bool q11_x_clamped = false;
    bool e11_clamped = false;        // negative numerator clamped to 0
    bool e11_exceeds_half = false;   // flagged, not clamped
    bool e11_uncertified = false;    // q11_x <= 0: no single-photon contribution certified
};

// All three bounds with degenerate cases expressed as flags instead of
// exceptions (e11 is set to 1 when uncertified).
DecoyBounds compute_decoy_bounds(const GainErrorTable& table);

struct SecretKeyResult {
    double secret_key_rate = 0.0;    // bits per detector gate, may be negative
    double sigma = 0.0;
    DecoyBounds bounds;
    double q_ss_z = 0.0;
    double e_ss_z = 0.0;
    double f = 1.0;
    bool first_term_zeroed = false;  // e11 above 0.5 or uncertified
};

// Secret key rate distilled from signal states,
//   S = kBasisSiftFactor * [ Q11_z (1 - h2(e11_x)) - Q_ss^z f h2(e_ss^z) ],
// reported even when negative. Requires f >= 1.
SecretKeyResult secret_key_rate(const GainErrorTable& table, double f);

// Monte-Carlo uncertainty propagation: every gain and error rate is
// resampled as an independent Gaussian with its cell sigma (gains clamped to
// >= 0, error rates to [0,1]), the rate recomputed per sample. Returns the
// sample mean and standard deviation; deterministic per seed. Requires
// n_samples >= 1000 and a defined error rate in every cell with positive
// gain that the formulas touch.
SecretKeyResult propagate_uncertainty(const GainErrorTable& table, double f,
                                      int n_samples, std::uint64_t seed);

}  // namespace mdiqkd
