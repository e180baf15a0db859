#include "mdiqkd/optics.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

#include "mdiqkd/common.hpp"

namespace mdiqkd {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

double wrap_phase(double phase) {
    double w = std::fmod(phase, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

// Cached default quadrature; other node counts are computed on demand.
const Quadrature& phase_quadrature(int n) {
    static const Quadrature cached = gauss_legendre(64);
    if (n == 64) return cached;
    thread_local Quadrature scratch;
    scratch = gauss_legendre(n);
    return scratch;
}

struct ScaledPulse {
    std::complex<double> early;
    std::complex<double> late;
};

ScaledPulse scale(const TimeBinPulsePair& p, double transmittance) {
    const double a = std::sqrt(transmittance);
    return {p.early * a, p.late * a};
}

// psi-minus and swap-symmetry share this canonical ordering: the pattern
// probability is symmetric under exchanging the two inputs, so computing on
// a canonical order makes gain_and_error's swap invariance bit-exact.
bool should_swap(const ScaledPulse& a, const ScaledPulse& b) {
    const auto key = [](const ScaledPulse& p) {
        return std::make_tuple(p.early.real(), p.early.imag(), p.late.real(), p.late.imag());
    };
    return key(b) < key(a);
}

double click_prob(double nbar, const DetectorModel& det) {
    return 1.0 - (1.0 - det.dark_count_prob) * std::exp(-det.efficiency * nbar);
}

// Expected photon numbers [detector][slot] for given inputs and relative
// phase; same arithmetic as beamsplitter_transform but without materializing
// the amplitude struct.
std::array<std::array<double, 2>, 2> expected_photons(const ScaledPulse& a,
                                                      const ScaledPulse& b,
                                                      double zeta, double phi) {
    const std::complex<double> rot(std::cos(phi), std::sin(phi));
    const double ortho2 = 1.0 - zeta * zeta;
    std::array<std::array<double, 2>, 2> n{};
    const std::complex<double> as[2] = {a.early, a.late};
    const std::complex<double> bs[2] = {b.early, b.late};
    for (int slot = 0; slot < 2; ++slot) {
        const std::complex<double> bpar = zeta * bs[slot] * rot;
        const double northo = 0.5 * ortho2 * std::norm(bs[slot]);
        n[0][slot] = 0.5 * std::norm(as[slot] + bpar) + northo;
        n[1][slot] = 0.5 * std::norm(as[slot] - bpar) + northo;
    }
    return n;
}

double psi_minus_pattern_probability(const std::array<std::array<double, 2>, 2>& n,
                                     const DetectorModel& det) {
    const double p00 = click_prob(n[0][0], det);
    const double p01 = click_prob(n[0][1], det);
    const double p10 = click_prob(n[1][0], det);
    const double p11 = click_prob(n[1][1], det);
    return p00 * p11 * (1.0 - p01) * (1.0 - p10) +
           p10 * p01 * (1.0 - p11) * (1.0 - p00);
}

void check_overlap(double overlap) {
    if (!(overlap >= 0.0 && overlap <= 1.0))
        throw std::invalid_argument("overlap must lie in [0, 1]");
}

void check_transmittances(std::pair<double, double> t) {
    if (!(t.first >= 0.0 && t.first <= 1.0 && t.second >= 0.0 && t.second <= 1.0))
        throw std::invalid_argument("link transmittances must lie in [0, 1]");
}

void check_nodes(int phase_nodes) {
    if (phase_nodes < 8)
        throw config_error("phase quadrature needs at least 8 nodes");
}

}  // namespace

TimeBinPulsePair encode_qubit(Basis basis, int bit, double mean_photon_number,
                              double global_phase, double extinction) {
    if (mean_photon_number < 0.0)
        throw std::invalid_argument("mean photon number must be >= 0");
    if (bit != 0 && bit != 1)
        throw std::invalid_argument("bit must be 0 or 1");
    if (!(extinction >= 0.0 && extinction <= 1.0))
        throw std::invalid_argument("extinction must lie in [0, 1]");

    TimeBinPulsePair p;
    p.basis = basis;
    p.bit = bit;
    p.mean_photon_number = mean_photon_number;
    p.global_phase = wrap_phase(global_phase);
    const std::complex<double> rot(std::cos(p.global_phase), std::sin(p.global_phase));
    if (basis == Basis::Z) {
        const double main = std::sqrt(mean_photon_number * (1.0 - extinction));
        const double leak = std::sqrt(mean_photon_number * extinction);
        if (bit == 0) {
            p.early = main * rot;
            p.late = leak * rot;
        } else {
            p.early = leak * rot;
            p.late = main * rot;
        }
    } else {
        const double amp = std::sqrt(0.5 * mean_photon_number);
        p.early = amp * rot;
        // |+> (bit 1) has relative phase 0, |-> (bit 0) has relative phase pi.
        p.late = (bit == 1 ? amp : -amp) * rot;
    }
    return p;
}

double mode_overlap(const DistinguishabilityParams& params) {
    if (!(params.pulse_fwhm_ps > 0.0))
        throw std::invalid_argument("pulse_fwhm_ps must be > 0");
    if (!(params.polarization_overlap >= 0.0 && params.polarization_overlap <= 1.0))
        throw std::invalid_argument("polarization_overlap must lie in [0, 1]");
    const double sigma_t = params.pulse_fwhm_ps / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    const double temporal = std::exp(-params.time_offset_ps * params.time_offset_ps /
                                     (8.0 * sigma_t * sigma_t));
    // MHz * ps -> dimensionless: 1e6 Hz * 1e-12 s = 1e-6
    const double nu_sigma = params.frequency_detuning_mhz * sigma_t * 1e-6;
    const double spectral = std::exp(-2.0 * M_PI * M_PI * nu_sigma * nu_sigma);
    return params.polarization_overlap * temporal * spectral;
}

void DetectorModel::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0))
        throw config_error("detector efficiency must lie in [0, 1]");
    if (!(dark_count_prob >= 0.0 && dark_count_prob < 1.0))
        throw config_error("dark_count_prob must lie in [0, 1)");
    if (!(dead_time_us >= 0.0))
        throw config_error("dead_time_us must be >= 0");
    if (!(gate_rate_hz > 0.0))
        throw config_error("gate_rate_hz must be > 0");
    if (!(coincidence_separation_ns > 0.0))
        throw config_error("coincidence_separation_ns must be > 0");
    if (!(coincidence_tolerance_ns >= 0.0 &&
          coincidence_tolerance_ns < coincidence_separation_ns))
        throw config_error("coincidence_tolerance_ns must lie in [0, separation)");
}

double BeamsplitterOutput::expected_photons(int detector, int slot) const {
    return std::norm(parallel[detector][slot]) + std::norm(orthogonal[detector][slot]);
}

double BeamsplitterOutput::total_expected_photons() const {
    double total = 0.0;
    for (int d = 0; d < 2; ++d)
        for (int s = 0; s < 2; ++s) total += expected_photons(d, s);
    return total;
}

BeamsplitterOutput beamsplitter_transform(const TimeBinPulsePair& alice,
                                          const TimeBinPulsePair& bob,
                                          double overlap, double relative_phase) {
    check_overlap(overlap);
    const std::complex<double> rot(std::cos(relative_phase), std::sin(relative_phase));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const double ortho = std::sqrt(1.0 - overlap * overlap);
    const std::complex<double> as[2] = {alice.early, alice.late};
    const std::complex<double> bs[2] = {bob.early, bob.late};
    BeamsplitterOutput out;
    for (int slot = 0; slot < 2; ++slot) {
        const std::complex<double> bpar = overlap * bs[slot] * rot;
        const std::complex<double> bort = ortho * bs[slot] * rot;
        out.parallel[0][slot] = (as[slot] + bpar) * inv_sqrt2;
        out.parallel[1][slot] = (as[slot] - bpar) * inv_sqrt2;
        out.orthogonal[0][slot] = bort * inv_sqrt2;
        out.orthogonal[1][slot] = -bort * inv_sqrt2;
    }
    return out;
}

ClickProbabilities click_probabilities(const BeamsplitterOutput& output,
                                       const DetectorModel& detector) {
    detector.validate();
    ClickProbabilities p{};
    for (int d = 0; d < 2; ++d)
        for (int s = 0; s < 2; ++s)
            p[d][s] = click_prob(output.expected_photons(d, s), detector);
    return p;
}

BSMOutcome make_bsm_outcome(const std::array<std::array<bool, 2>, 2>& clicks) {
    BSMOutcome o;
    o.clicks = clicks;
    const bool pattern1 = clicks[0][0] && clicks[1][1] && !clicks[0][1] && !clicks[1][0];
    const bool pattern2 = clicks[1][0] && clicks[0][1] && !clicks[1][1] && !clicks[0][0];
    o.classification = (pattern1 || pattern2) ? BSMOutcome::Classification::PsiMinus
                                              : BSMOutcome::Classification::NoProjection;
    return o;
}

double psi_minus_probability(const TimeBinPulsePair& alice,
                             const TimeBinPulsePair& bob, double overlap,
                             const DetectorModel& detector,
                             std::pair<double, double> link_transmittances,
                             int phase_nodes) {
    check_overlap(overlap);
    check_transmittances(link_transmittances);
    check_nodes(phase_nodes);
    detector.validate();

    ScaledPulse a = scale(alice, link_transmittances.first);
    ScaledPulse b = scale(bob, link_transmittances.second);
    if (should_swap(a, b)) std::swap(a, b);

    const Quadrature& q = phase_quadrature(phase_nodes);
    double acc = 0.0;
    for (int i = 0; i < phase_nodes; ++i) {
        const double phi = M_PI * (q.nodes[i] + 1.0);
        acc += q.weights[i] * psi_minus_pattern_probability(expected_photons(a, b, overlap, phi), detector);
    }
    // integral over [0,2pi) divided by 2pi; the phi map contributes pi, so
    // the normalized average is acc / 2.
    return 0.5 * acc;
}

GainError gain_and_error(Basis basis, double mu_alice, double mu_bob,
                         double overlap, const DetectorModel& detector,
                         std::pair<double, double> link_transmittances,
                         int phase_nodes, double extinction) {
    double p_equal = 0.0;    // error pairs: flipped bits disagree
    double p_unequal = 0.0;  // correct pairs
    for (int bit_a = 0; bit_a < 2; ++bit_a) {
        for (int bit_b = 0; bit_b < 2; ++bit_b) {
            const TimeBinPulsePair a = encode_qubit(basis, bit_a, mu_alice, 0.0, extinction);
            const TimeBinPulsePair b = encode_qubit(basis, bit_b, mu_bob, 0.0, extinction);
            const double p = psi_minus_probability(a, b, overlap, detector,
                                                   link_transmittances, phase_nodes);
            (bit_a == bit_b ? p_equal : p_unequal) += p;
        }
    }
    GainError result;
    const double total = p_equal + p_unequal;
    result.gain = total / 4.0;
    if (total > 0.0) result.error_rate = p_equal / total;
    return result;
}

std::optional<double> hom_visibility(double mu, double overlap,
                                     const DetectorModel& detector,
                                     int phase_nodes) {
    if (!(mu > 0.0)) throw std::invalid_argument("hom_visibility requires mu > 0");
    check_overlap(overlap);
    check_nodes(phase_nodes);
    detector.validate();

    const TimeBinPulsePair pulse = encode_qubit(Basis::Z, 0, mu, 0.0);
    const ScaledPulse a{pulse.early, pulse.late};
    const Quadrature& q = phase_quadrature(phase_nodes);
    auto coincidence = [&](double zeta) {
        double acc = 0.0;
        for (int i = 0; i < phase_nodes; ++i) {
            const double phi = M_PI * (q.nodes[i] + 1.0);
            const auto n = expected_photons(a, a, zeta, phi);
            double c = 0.0;
            for (int slot = 0; slot < 2; ++slot)
                c += click_prob(n[0][slot], detector) * click_prob(n[1][slot], detector);
            acc += q.weights[i] * c;
        }
        return 0.5 * acc;
    };
    const double c_dist = coincidence(0.0);
    if (c_dist <= 0.0) return std::nullopt;
    const double c_match = coincidence(overlap);
    return (c_dist - c_match) / c_dist;
}

}  // namespace mdiqkd
