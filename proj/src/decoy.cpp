#include "mdiqkd/decoy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "mdiqkd/common.hpp"

namespace mdiqkd {

double poisson_pn(double mu, int n) {
    if (mu < 0.0) throw std::invalid_argument("poisson_pn requires mu >= 0");
    if (n < 0) throw std::invalid_argument("poisson_pn requires n >= 0");
    double p = std::exp(-mu);
    for (int i = 1; i <= n; ++i) p *= mu / i;
    return p;
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument("binary_entropy requires x in [0, 1]");
    const double lo = std::min(x, 1.0 - x);
    const double hi = std::max(x, 1.0 - x);
    if (lo == 0.0) return 0.0;
    return -lo * std::log2(lo) - hi * std::log2(hi);
}

double q0_term(Basis basis, Q0Which which, const GainErrorTable& table) {
    const IntensityClass w =
        which == Q0Which::Decoy ? IntensityClass::Decoy : IntensityClass::Signal;
    const double mu = table.intensities.value(w);
    const double p0 = poisson_pn(mu, 0);
    const double q_vw = table.require(basis, IntensityClass::Vacuum, w).gain;
    const double q_wv = table.require(basis, w, IntensityClass::Vacuum).gain;
    const double q_vv =
        table.require(basis, IntensityClass::Vacuum, IntensityClass::Vacuum).gain;
    return p0 * (q_vw + q_wv) - p0 * p0 * q_vv;
}

BoundValue y11_lower_bound(Basis basis, const GainErrorTable& table) {
    table.intensities.validate();
    const double mus = table.intensities.mu_signal;
    const double mud = table.intensities.mu_decoy;
    const double p1s = poisson_pn(mus, 1), p2s = poisson_pn(mus, 2);
    const double p1d = poisson_pn(mud, 1), p2d = poisson_pn(mud, 2);

    const double denominator = p1s * p1d * (p1d * p2s - p1s * p2d);
    if (!(denominator > 0.0))
        throw config_error(
            "single-photon bound denominator is not positive; requires mu_signal > mu_decoy > 0");

    const double q_ss =
        table.require(basis, IntensityClass::Signal, IntensityClass::Signal).gain;
    const double q_dd =
        table.require(basis, IntensityClass::Decoy, IntensityClass::Decoy).gain;
    const double numerator =
        p1s * p2s * (q_dd - q0_term(basis, Q0Which::Decoy, table)) -
        p1d * p2d * (q_ss - q0_term(basis, Q0Which::Signal, table));

    BoundValue b;
    b.value = numerator / denominator;
    if (b.value < 0.0) {
        b.value = 0.0;
        b.clamped = true;
    }
    return b;
}

BoundValue q11_lower_bound(Basis basis, const GainErrorTable& table) {
    BoundValue y = y11_lower_bound(basis, table);
    const double p1s = poisson_pn(table.intensities.mu_signal, 1);
    y.value *= p1s * p1s;
    return y;
}

namespace {

double e11_numerator(const GainErrorTable& table) {
    const double p0d = poisson_pn(table.intensities.mu_decoy, 0);
    return table.error_gain(Basis::X, IntensityClass::Decoy, IntensityClass::Decoy) -
           p0d * table.error_gain(Basis::X, IntensityClass::Vacuum, IntensityClass::Decoy) -
           p0d * table.error_gain(Basis::X, IntensityClass::Decoy, IntensityClass::Vacuum) +
           p0d * p0d *
               table.error_gain(Basis::X, IntensityClass::Vacuum, IntensityClass::Vacuum);
}

}  // namespace

double e11_upper_bound(const GainErrorTable& table, double q11_x_lower) {
    if (!(q11_x_lower > 0.0))
        throw config_error("no single-photon contribution certified (q11_x lower bound <= 0)");
    const double p1s = poisson_pn(table.intensities.mu_signal, 1);
    const double p1d = poisson_pn(table.intensities.mu_decoy, 1);
    const double y11_x = q11_x_lower / (p1s * p1s);
    const double e11 = e11_numerator(table) / (p1d * p1d * y11_x);
    return std::max(e11, 0.0);
}

DecoyBounds compute_decoy_bounds(const GainErrorTable& table) {
    table.validate_for_analysis();
    DecoyBounds b;
    const BoundValue qz = q11_lower_bound(Basis::Z, table);
    const BoundValue qx = q11_lower_bound(Basis::X, table);
    b.q11_z_lower = qz.value;
    b.q11_z_clamped = qz.clamped;
    b.q11_x_lower = qx.value;
    b.q11_x_clamped = qx.clamped;
    if (qx.value > 0.0) {
        const double p1s = poisson_pn(table.intensities.mu_signal, 1);
        const double p1d = poisson_pn(table.intensities.mu_decoy, 1);
        const double y11_x = qx.value / (p1s * p1s);
        const double raw = e11_numerator(table) / (p1d * p1d * y11_x);
        b.e11_x_upper = raw;
        if (raw < 0.0) {
            b.e11_x_upper = 0.0;
            b.e11_clamped = true;
        }
        b.e11_exceeds_half = b.e11_x_upper > 0.5;
    } else {
        b.e11_uncertified = true;
        b.e11_x_upper = 1.0;
        b.e11_exceeds_half = true;
    }
    return b;
}

namespace {

SecretKeyResult secret_key_rate_from_bounds(const GainErrorTable& table,
                                            const DecoyBounds& bounds, double f) {
    SecretKeyResult r;
    r.bounds = bounds;
    r.f = f;
    const GainErrorRecord& ss_z =
        table.require(Basis::Z, IntensityClass::Signal, IntensityClass::Signal);
    r.q_ss_z = ss_z.gain;
    if (ss_z.gain > 0.0) {
        if (!ss_z.error_rate)
            throw config_error("cell (z, ss) has positive gain but an undefined error rate");
        r.e_ss_z = *ss_z.error_rate;
    }

    double first = 0.0;
    if (bounds.e11_uncertified || bounds.e11_exceeds_half) {
        r.first_term_zeroed = true;
    } else {
        first = bounds.q11_z_lower * (1.0 - binary_entropy(bounds.e11_x_upper));
    }
    const double correction = r.q_ss_z * f * binary_entropy(r.e_ss_z);
    r.secret_key_rate = kBasisSiftFactor * (first - correction);
    return r;
}

}  // namespace

SecretKeyResult secret_key_rate(const GainErrorTable& table, double f) {
    if (!(f >= 1.0)) throw config_error("error-correction efficiency f must be >= 1");
    return secret_key_rate_from_bounds(table, compute_decoy_bounds(table), f);
}

SecretKeyResult propagate_uncertainty(const GainErrorTable& table, double f,
                                      int n_samples, std::uint64_t seed) {
    if (n_samples < 1000)
        throw std::invalid_argument("propagate_uncertainty requires n_samples >= 1000");
    if (!(f >= 1.0)) throw config_error("error-correction efficiency f must be >= 1");
    table.validate_for_analysis();
    // Surface undefined-but-required error rates before any sampling: the
    // e11 numerator touches the x-basis dd/vd/dv/vv cells, the key-rate
    // correction term the z-basis ss cell.
    (void)table.error_gain(Basis::X, IntensityClass::Decoy, IntensityClass::Decoy);
    (void)table.error_gain(Basis::X, IntensityClass::Vacuum, IntensityClass::Decoy);
    (void)table.error_gain(Basis::X, IntensityClass::Decoy, IntensityClass::Vacuum);
    (void)table.error_gain(Basis::X, IntensityClass::Vacuum, IntensityClass::Vacuum);
    (void)table.error_gain(Basis::Z, IntensityClass::Signal, IntensityClass::Signal);

    std::mt19937_64 rng(splitmix64(seed ^ 0x5b1ce2a8f09d47c3ULL));
    std::normal_distribution<double> gauss(0.0, 1.0);

    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        GainErrorTable resampled = table;
        for (auto& basis_cells : resampled.cells) {
            for (auto& cell : basis_cells) {
                if (!cell) continue;
                if (cell->sigma_gain > 0.0)
                    cell->gain = std::max(0.0, cell->gain + cell->sigma_gain * gauss(rng));
                if (cell->error_rate && cell->sigma_error > 0.0)
                    cell->error_rate = std::clamp(
                        *cell->error_rate + cell->sigma_error * gauss(rng), 0.0, 1.0);
            }
        }
        const double s =
            secret_key_rate_from_bounds(resampled, compute_decoy_bounds(resampled), f)
                .secret_key_rate;
        const double delta = s - mean;
        mean += delta / (i + 1);
        m2 += delta * (s - mean);
    }

    SecretKeyResult r = secret_key_rate_from_bounds(table, compute_decoy_bounds(table), f);
    r.secret_key_rate = mean;
    r.sigma = n_samples > 1 ? std::sqrt(m2 / (n_samples - 1)) : 0.0;
    return r;
}

}  // namespace mdiqkd
