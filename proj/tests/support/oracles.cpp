#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "mdiqkd/common.hpp"
#include "mdiqkd/protocol.hpp"

namespace mdiqkd::testing {

namespace {

MonteCarloEstimate finish(std::uint64_t hits, std::uint64_t samples) {
    MonteCarloEstimate e;
    e.hits = hits;
    e.samples = samples;
    e.value = static_cast<double>(hits) / static_cast<double>(samples);
    e.std_error = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(samples));
    return e;
}

}  // namespace

MonteCarloEstimate mc_psi_minus_probability(const TimeBinPulsePair& alice,
                                            const TimeBinPulsePair& bob,
                                            double overlap,
                                            const DetectorModel& detector,
                                            std::pair<double, double> link_transmittances,
                                            std::uint64_t samples, std::uint64_t seed) {
    const double sa = std::sqrt(link_transmittances.first);
    const double sb = std::sqrt(link_transmittances.second);
    const std::complex<double> a[2] = {alice.early * sa, alice.late * sa};
    const std::complex<double> b[2] = {bob.early * sb, bob.late * sb};
    const double ortho2 = 1.0 - overlap * overlap;
    const double eta = detector.efficiency;
    const double dark = detector.dark_count_prob;

    std::mt19937_64 rng(splitmix64(seed));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double phi = 2.0 * M_PI * uni(rng);
        const std::complex<double> rot(std::cos(phi), std::sin(phi));
        bool click[2][2];
        for (int slot = 0; slot < 2; ++slot) {
            const std::complex<double> bpar = overlap * b[slot] * rot;
            const double n_ortho = 0.5 * ortho2 * std::norm(b[slot]);
            const double n0 = 0.5 * std::norm(a[slot] + bpar) + n_ortho;
            const double n1 = 0.5 * std::norm(a[slot] - bpar) + n_ortho;
            click[0][slot] = uni(rng) < 1.0 - (1.0 - dark) * std::exp(-eta * n0);
            click[1][slot] = uni(rng) < 1.0 - (1.0 - dark) * std::exp(-eta * n1);
        }
        const bool pattern1 = click[0][0] && click[1][1] && !click[0][1] && !click[1][0];
        const bool pattern2 = click[1][0] && click[0][1] && !click[1][1] && !click[0][0];
        if (pattern1 || pattern2) ++hits;
    }
    return finish(hits, samples);
}

MonteCarloEstimate mc_coincidence_probability(double mu, double overlap,
                                              const DetectorModel& detector,
                                              std::uint64_t samples, std::uint64_t seed) {
    const double amp = std::sqrt(mu);
    const double ortho2 = 1.0 - overlap * overlap;
    const double eta = detector.efficiency;
    const double dark = detector.dark_count_prob;

    std::mt19937_64 rng(splitmix64(seed ^ 0x8f3a2b1cd4e5f607ULL));
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::uint64_t hits = 0;
    for (std::uint64_t i = 0; i < samples; ++i) {
        const double phi = 2.0 * M_PI * uni(rng);
        // both pulses occupy the early slot only
        const std::complex<double> rot(std::cos(phi), std::sin(phi));
        const std::complex<double> bpar = overlap * amp * rot;
        const double n_ortho = 0.5 * ortho2 * mu;
        const double n0 = 0.5 * std::norm(amp + bpar) + n_ortho;
        const double n1 = 0.5 * std::norm(amp - bpar) + n_ortho;
        const bool c0e = uni(rng) < 1.0 - (1.0 - dark) * std::exp(-eta * n0);
        const bool c1e = uni(rng) < 1.0 - (1.0 - dark) * std::exp(-eta * n1);
        const bool c0l = uni(rng) < dark;
        const bool c1l = uni(rng) < dark;
        if ((c0e && c1e) || (c0l && c1l)) ++hits;
    }
    return finish(hits, samples);
}

namespace {

struct PhotonRouting {
    // probability that a photon of this state lands in the early bin
    double p_early = 1.0;
};

PhotonRouting routing_for(Basis basis, int bit) {
    if (basis == Basis::X) return {0.5};
    return {bit == 0 ? 1.0 : 0.0};
}

}  // namespace

FockCampaign run_fock_campaign(const FockParams& params, std::uint64_t gates_per_cell,
                               std::uint64_t seed) {
    params.intensities.validate();
    FockCampaign campaign;
    campaign.table.intensities = params.intensities;

    static constexpr IntensityClass kClasses[] = {IntensityClass::Signal,
                                                  IntensityClass::Decoy,
                                                  IntensityClass::Vacuum};
    int cell_index = 0;
    for (Basis basis : {Basis::Z, Basis::X}) {
        for (IntensityClass ia : kClasses) {
            for (IntensityClass ib : kClasses) {
                const double mu_a = params.intensities.value(ia);
                const double mu_b = params.intensities.value(ib);
                std::mt19937_64 rng(mix_seed(seed, 7000 + cell_index));
                std::uniform_real_distribution<double> uni(0.0, 1.0);
                std::poisson_distribution<int> poisson_a(mu_a);
                std::poisson_distribution<int> poisson_b(mu_b);

                FockCellTally tally;
                const double keep_a = params.transmittance_alice * params.efficiency;
                const double keep_b = params.transmittance_bob * params.efficiency;
                for (std::uint64_t gate = 0; gate < gates_per_cell; ++gate) {
                    const int bit_a = uni(rng) < 0.5 ? 0 : 1;
                    const int bit_b = uni(rng) < 0.5 ? 0 : 1;
                    const int n_a = mu_a > 0.0 ? poisson_a(rng) : 0;
                    const int n_b = mu_b > 0.0 ? poisson_b(rng) : 0;

                    bool landed[2][2] = {{false, false}, {false, false}};
                    const PhotonRouting route_a = routing_for(basis, bit_a);
                    for (int ph = 0; ph < n_a; ++ph) {
                        if (uni(rng) >= keep_a) continue;
                        const int slot = uni(rng) < route_a.p_early ? 0 : 1;
                        const int det = uni(rng) < 0.5 ? 0 : 1;
                        landed[det][slot] = true;
                    }
                    const PhotonRouting route_b = routing_for(basis, bit_b);
                    for (int ph = 0; ph < n_b; ++ph) {
                        if (uni(rng) >= keep_b) continue;
                        const int slot = uni(rng) < route_b.p_early ? 0 : 1;
                        const int det = uni(rng) < 0.5 ? 0 : 1;
                        landed[det][slot] = true;
                    }
                    std::array<std::array<bool, 2>, 2> clicks{};
                    for (int det = 0; det < 2; ++det)
                        for (int slot = 0; slot < 2; ++slot)
                            clicks[det][slot] =
                                landed[det][slot] || uni(rng) < params.dark_count_prob;

                    const BSMOutcome outcome = make_bsm_outcome(clicks);
                    const bool psi_minus =
                        outcome.classification == BSMOutcome::Classification::PsiMinus;
                    const bool error = psi_minus && bit_a == bit_b;
                    const bool tagged = n_a == 1 && n_b == 1;

                    ++tally.gates;
                    if (psi_minus) ++tally.psi_minus;
                    if (error) ++tally.errors;
                    if (tagged) {
                        ++tally.gates_11;
                        if (psi_minus) ++tally.psi_minus_11;
                        if (error) ++tally.errors_11;
                    }
                }

                CellCounts counts;
                counts.gates_sent = tally.gates;
                counts.psi_minus = tally.psi_minus;
                counts.errors = tally.errors;
                campaign.table.set_cell(basis, ia, ib, estimate_gain_error(counts));
                if (ia == IntensityClass::Signal && ib == IntensityClass::Signal)
                    campaign.ss_tally[GainErrorTable::basis_index(basis)] = tally;
                ++cell_index;
            }
        }
    }
    return campaign;
}

}  // namespace mdiqkd::testing
