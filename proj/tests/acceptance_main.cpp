// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Statistical criteria run with fixed seeds so the suite is
// deterministic.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "mdiqkd/channel.hpp"
#include "mdiqkd/common.hpp"
#include "mdiqkd/decoy.hpp"
#include "mdiqkd/io.hpp"
#include "mdiqkd/optics.hpp"
#include "mdiqkd/protocol.hpp"
#include "support/oracles.hpp"

using namespace mdiqkd;
namespace chrono = std::chrono;

namespace {

int g_failures = 0;

double seconds_since(chrono::steady_clock::time_point start) {
    return chrono::duration<double>(chrono::steady_clock::now() - start).count();
}

void report(int index, const std::string& name, bool pass, const std::string& detail,
            double elapsed_s) {
    std::printf("[%d] %-28s %s  (%s) [%.2f s]\n", index, name.c_str(),
                pass ? "PASS" : "FAIL", detail.c_str(), elapsed_s);
    if (!pass) ++g_failures;
}

std::filesystem::path data_dir_from_args(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--data-dir") return argv[i + 1];
    return default_data_dir();
}

// ---------------------------------------------------------------------------
// criteria 1 + 2: golden reproduction of the published rates, all positive

std::vector<ReproduceRow> criterion_reproduce(const std::filesystem::path& data_dir) {
    const auto start = chrono::steady_clock::now();
    const auto rows = run_reproduce(data_dir, 1.14, 20000, 20120901);
    const double elapsed = seconds_since(start);

    bool pass = rows.size() == 4 && elapsed < 1.0;
    std::string detail;
    for (const auto& r : rows) {
        if (!r.pass) pass = false;
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%s %.3g vs %.2g(%.2g) %.2fs.d.; ",
                      r.setup_name.c_str(), r.computed_s, r.published_s, r.published_sigma,
                      r.deviation_sigmas);
        detail += buf;
    }
    report(1, "golden reproduction", pass, detail, elapsed);

    const auto start2 = chrono::steady_clock::now();
    bool positive = !rows.empty();
    detail.clear();
    for (const auto& r : rows) {
        if (!(r.computed_s > 0.0)) positive = false;
        detail += r.setup_name + (r.computed_s > 0.0 ? " > 0; " : " <= 0; ");
    }
    report(2, "positive key rates", positive, detail, seconds_since(start2));
    return rows;
}

// ---------------------------------------------------------------------------
// criterion 3: ideal-limit error rates from a full simulated campaign

void criterion_ideal_limits() {
    const auto start = chrono::steady_clock::now();
    SetupConfig s;
    s.name = "ideal-limit";
    s.link_alice = {0.0, 0.0};
    s.link_bob = {0.0, 0.0};
    s.intensities.mu_signal = 0.05;
    s.intensities.mu_decoy = 0.02;
    s.detector.efficiency = 0.3;
    s.detector.dark_count_prob = 0.0;
    s.drift.timing_sine_amp_ps = 0.0;
    s.drift.timing_walk_ps_per_sqrt_s = 0.0;
    s.drift.pol_sine_amp = 0.0;
    s.drift.pol_walk_per_sqrt_s = 0.0;
    s.drift.freq_rate_cap_mhz_per_hour = 0.0;
    s.stabilizer.enabled = false;

    const CampaignResult res = run_campaign(s, 10000000, 3001);
    const auto& z = res.table.require(Basis::Z, IntensityClass::Signal, IntensityClass::Signal);
    const auto& x = res.table.require(Basis::X, IntensityClass::Signal, IntensityClass::Signal);
    const double elapsed = seconds_since(start);

    bool pass = elapsed < 120.0;
    char detail[160];
    const double ez = z.error_rate.value_or(0.0);
    const double ex = x.error_rate.value_or(-1.0);
    if (!(std::abs(ez) <= 3.0 * z.sigma_error)) pass = false;
    if (!(std::abs(ex - 0.25) <= 3.0 * x.sigma_error)) pass = false;
    std::snprintf(detail, sizeof(detail), "e_z=%.2g (3s.d.=%.2g), e_x=%.4f vs 0.25 (3s.d.=%.3f), 1e7 gates/cell",
                  ez, 3.0 * z.sigma_error, ex, 3.0 * x.sigma_error);
    report(3, "ideal-limit error rates", pass, detail, elapsed);
}

// ---------------------------------------------------------------------------
// criterion 4: HOM visibility ceiling and monotonicity

void criterion_hom() {
    const auto start = chrono::steady_clock::now();
    DetectorModel det;
    det.efficiency = 1.0;
    det.dark_count_prob = 0.0;

    const double v_limit = hom_visibility(1e-4, 1.0, det).value();
    bool pass = std::abs(v_limit - 0.5) < 1e-3;

    double prev = -1.0;
    for (int i = 0; i < 20; ++i) {
        const double zeta = static_cast<double>(i) / 19.0;
        const double v = hom_visibility(0.05, zeta, det).value();
        if (v < prev - 1e-12) pass = false;
        prev = v;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "V(mu->0, zeta=1)=%.6f, 20-point grid monotone", v_limit);
    report(4, "HOM ceiling", pass, detail, seconds_since(start));
}

// ---------------------------------------------------------------------------
// criterion 5: decoy bounds hold against the photon-level oracle

void criterion_bound_validity() {
    const auto start = chrono::steady_clock::now();
    std::mt19937_64 rng(501);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    const int trials = 50;
    const std::uint64_t gates = 200000;
    int held = 0;
    std::string worst;
    double worst_margin = 1e9;

    for (int trial = 0; trial < trials; ++trial) {
        testing::FockParams params;
        params.intensities.mu_signal = 0.3 + 0.3 * uni(rng);
        params.intensities.mu_decoy = 0.05 + 0.10 * uni(rng);
        params.transmittance_alice = 0.5 + 0.5 * uni(rng);
        params.transmittance_bob = 0.5 + 0.5 * uni(rng);
        params.efficiency = 0.5 + 0.4 * uni(rng);
        params.dark_count_prob = 1e-6 + 3e-5 * uni(rng);

        const auto campaign = testing::run_fock_campaign(params, gates, 9000 + trial);
        const GainErrorTable& table = campaign.table;

        // resampling spread of the bounds under counting statistics
        std::mt19937_64 boot(77000 + trial);
        std::normal_distribution<double> gauss(0.0, 1.0);
        double sq_z = 0.0, sq_x = 0.0, se = 0.0;
        double mq_z = 0.0, mq_x = 0.0, me = 0.0;
        const int resamples = 200;
        for (int r = 0; r < resamples; ++r) {
            GainErrorTable perturbed = table;
            for (auto& basis_cells : perturbed.cells)
                for (auto& cell : basis_cells) {
                    if (!cell) continue;
                    if (cell->sigma_gain > 0.0)
                        cell->gain = std::max(0.0, cell->gain + cell->sigma_gain * gauss(boot));
                    if (cell->error_rate && cell->sigma_error > 0.0)
                        cell->error_rate = std::clamp(
                            *cell->error_rate + cell->sigma_error * gauss(boot), 0.0, 1.0);
                }
            const double qz = q11_lower_bound(Basis::Z, perturbed).value;
            const double qx = q11_lower_bound(Basis::X, perturbed).value;
            const double e11 = qx > 0.0 ? e11_upper_bound(perturbed, qx) : 1.0;
            mq_z += qz;
            mq_x += qx;
            me += e11;
            sq_z += qz * qz;
            sq_x += qx * qx;
            se += e11 * e11;
        }
        mq_z /= resamples;
        mq_x /= resamples;
        me /= resamples;
        const double sigma_qz = std::sqrt(std::max(0.0, sq_z / resamples - mq_z * mq_z));
        const double sigma_qx = std::sqrt(std::max(0.0, sq_x / resamples - mq_x * mq_x));
        const double sigma_e = std::sqrt(std::max(0.0, se / resamples - me * me));

        bool ok = true;
        for (Basis basis : {Basis::Z, Basis::X}) {
            const auto& tally = campaign.ss_tally[GainErrorTable::basis_index(basis)];
            const double n = static_cast<double>(tally.gates);
            const double true_q11 = static_cast<double>(tally.psi_minus_11) / n;
            const double sigma_true = std::sqrt(static_cast<double>(tally.psi_minus_11)) / n;
            const double bound = q11_lower_bound(basis, table).value;
            const double sigma_bound = basis == Basis::Z ? sigma_qz : sigma_qx;
            const double slack = 3.0 * std::hypot(sigma_bound, sigma_true);
            const double margin = (true_q11 + slack - bound) / true_q11;
            if (bound > true_q11 + slack) ok = false;
            if (margin < worst_margin) {
                worst_margin = margin;
                char buf[96];
                std::snprintf(buf, sizeof(buf), "trial %d %s-basis Q11 margin %.2f%%", trial,
                              basis_label(basis), 100.0 * margin);
                worst = buf;
            }
        }
        {
            const auto& tally = campaign.ss_tally[GainErrorTable::basis_index(Basis::X)];
            const double k = static_cast<double>(tally.psi_minus_11);
            const double true_e11 = k > 0.0 ? static_cast<double>(tally.errors_11) / k : 0.0;
            const double sigma_true =
                k > 0.0 ? std::sqrt(std::max(true_e11 * (1.0 - true_e11), 1e-12) / k) : 0.0;
            const double qx = q11_lower_bound(Basis::X, table).value;
            const double bound = qx > 0.0 ? e11_upper_bound(table, qx) : 1.0;
            if (bound < true_e11 - 3.0 * std::hypot(sigma_e, sigma_true)) ok = false;
        }
        if (ok) ++held;
    }

    const double elapsed = seconds_since(start);
    const bool pass = held == trials && elapsed < 600.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%d/%d trials held; tightest: %s", held, trials,
                  worst.c_str());
    report(5, "decoy bound validity", pass, detail, elapsed);
}

// ---------------------------------------------------------------------------
// criterion 6: analytic psi-minus probability vs Monte-Carlo click sampling

void criterion_oracle_equivalence() {
    const auto start = chrono::steady_clock::now();
    std::mt19937_64 rng(601);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    int agreed = 0;
    double worst_pull = 0.0;
    const int points = 20;
    for (int i = 0; i < points; ++i) {
        const Basis basis = uni(rng) < 0.5 ? Basis::Z : Basis::X;
        const auto alice =
            encode_qubit(basis, uni(rng) < 0.5 ? 0 : 1, 0.05 + 0.5 * uni(rng), 2.0 * M_PI * uni(rng));
        const auto bob =
            encode_qubit(basis, uni(rng) < 0.5 ? 0 : 1, 0.05 + 0.5 * uni(rng), 2.0 * M_PI * uni(rng));
        const double zeta = uni(rng);
        DetectorModel det;
        det.efficiency = 0.2 + 0.7 * uni(rng);
        det.dark_count_prob = 1e-6 + 1e-4 * uni(rng);
        const std::pair<double, double> trans{0.3 + 0.7 * uni(rng), 0.3 + 0.7 * uni(rng)};

        const double analytic = psi_minus_probability(alice, bob, zeta, det, trans);
        const auto mc = testing::mc_psi_minus_probability(alice, bob, zeta, det, trans,
                                                          10000000, 60100 + i);
        const double pull = std::abs(analytic - mc.value) / mc.std_error;
        worst_pull = std::max(worst_pull, pull);
        if (pull < 3.0) ++agreed;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail), "%d/%d points within 3 s.e. at 1e7 samples (worst %.2f)",
                  agreed, points, worst_pull);
    report(6, "oracle equivalence", agreed == points, detail, seconds_since(start));
}

// ---------------------------------------------------------------------------
// criterion 7: stabilizers keep photons indistinguishable

void criterion_stabilizers() {
    const auto start = chrono::steady_clock::now();
    DriftParams params;
    StabilizerConfig on;
    StabilizerConfig off;
    off.enabled = false;

    int improved = 0;
    bool residual_ok = true;
    for (std::uint64_t seed = 700; seed < 720; ++seed) {
        const auto with = simulate_drift(params, on, 600.0, 0.1, seed);
        const auto without = simulate_drift(params, off, 600.0, 0.1, seed);
        double mean_with = 0.0, mean_without = 0.0;
        for (const auto& s : with.samples) mean_with += s.mode_overlap;
        for (const auto& s : without.samples) mean_without += s.mode_overlap;
        mean_with /= with.samples.size();
        mean_without /= without.samples.size();
        if (mean_with > mean_without) ++improved;
        for (const auto& s : with.samples)
            if (s.timing_corrected && std::abs(s.state.delta_t_ps) > 30.0) residual_ok = false;
    }
    char detail[96];
    std::snprintf(detail, sizeof(detail),
                  "overlap improved in %d/20 seeds; post-correction |dt| <= 30 ps %s", improved,
                  residual_ok ? "always" : "violated");
    report(7, "stabilizer efficacy", improved == 20 && residual_ok, detail,
           seconds_since(start));
}

// ---------------------------------------------------------------------------
// criterion 8: device-dependent observables, covered by trend checks only

void criterion_qualitative(const std::vector<ReproduceRow>& rows) {
    const auto start = chrono::steady_clock::now();
    // The measured HOM visibility (47 +- 1 %), the 18 +- 4.8 dB maximum-loss
    // estimate and absolute hardware rates depend on a device model that is
    // not part of this artifact; they are checked for sign and trend only.
    DetectorModel det;
    det.efficiency = 1.0;
    det.dark_count_prob = 0.0;
    const double v_mid = hom_visibility(0.05, 0.95, det).value();
    bool pass = v_mid > 0.40 && v_mid < 0.50;

    // key rate falls with loss across the spool setups, and stays positive
    // at the largest demonstrated loss (18.2 dB)
    double prev = 1e9;
    double s_18db = 0.0;
    for (const auto& r : rows) {
        if (r.setup_name == "setup-2") continue;
        if (!(r.computed_s < prev)) pass = false;
        prev = r.computed_s;
        if (r.setup_name == "setup-1c") s_18db = r.computed_s;
    }
    if (!(s_18db > 0.0)) pass = false;

    char detail[128];
    std::snprintf(detail, sizeof(detail),
                  "V(zeta=0.95)=%.3f in (0.40,0.50); spool S falls with loss; S(18.2 dB)=%.2g > 0",
                  v_mid, s_18db);
    report(8, "qualitative trends only", pass, detail, seconds_since(start));
}

}  // namespace

int main(int argc, char** argv) {
    const auto data_dir = data_dir_from_args(argc, argv);
    std::printf("acceptance suite (data dir: %s)\n", data_dir.string().c_str());
    try {
        const auto rows = criterion_reproduce(data_dir);
        criterion_ideal_limits();
        criterion_hom();
        criterion_bound_validity();
        criterion_oracle_equivalence();
        criterion_stabilizers();
        criterion_qualitative(rows);
    } catch (const std::exception& e) {
        std::printf("aborted: %s\n", e.what());
        return 99;
    }
    std::printf("%s\n", g_failures == 0 ? "all criteria passed" : "criteria failed");
    return g_failures;
}
