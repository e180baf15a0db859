#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mdiqkd/config.hpp"
#include "mdiqkd/decoy.hpp"
#include "mdiqkd/protocol.hpp"
#include "mdiqkd/table.hpp"

namespace mdiqkd {

inline constexpr const char* kToolVersion = "0.1.0";

// Directory holding the bundled scenario and measurement files. Defaults to
// the build-time data path; overridable via --data-dir.
std::filesystem::path default_data_dir();

// FNV-1a over a canonical text serialization of the config; stable across
// runs and platforms.
std::uint64_t config_hash(const SetupConfig& config);
std::string config_hash_hex(const SetupConfig& config);

// Scenario files: JSON ('//' comments allowed), one entry per setup. An
// empty file yields an empty list. Schema violations name the offending
// setup, field and constraint.
std::vector<SetupConfig> load_scenario(const std::filesystem::path& path);
const SetupConfig& find_setup(const std::vector<SetupConfig>& setups,
                              const std::string& name);

// Measurement tables: comma-separated text with '#' comment lines, header
//   setup,basis,intensity_a,intensity_b,Q,sigma_Q,e,sigma_e
// and optional intensity directives
//   # intensities <setup> mu_signal=<v> mu_decoy=<v>
// Undefined error rates are written as nan. Parsing is locale independent.
std::map<std::string, GainErrorTable> ingest_measurements(const std::filesystem::path& path);

void write_measurements(const std::filesystem::path& path,
                        const std::map<std::string, GainErrorTable>& tables,
                        const std::string& provenance);

// Full analysis output for one setup; every number is traceable to the
// config hash and seed recorded here.
struct ReportBundle {
    std::string setup_name;
    std::string tool_version = kToolVersion;
    std::string config_hash_hex;
    std::uint64_t seed = 0;
    GainErrorTable table;
    SecretKeyResult result;
    double duty_fraction = 1.0;
    double dead_time_utilization = 1.0;
    double wall_clock_seconds = 0.0;
};

ReportBundle analyze_table(const SetupConfig& config, const GainErrorTable& table,
                           int n_samples, std::uint64_t seed);

std::string render_report(const ReportBundle& report);

// One row of the reproduce comparison.
struct ReproduceRow {
    std::string setup_name;
    double total_loss_db = 0.0;
    double computed_s = 0.0;
    double computed_sigma = 0.0;
    double published_s = 0.0;
    double published_sigma = 0.0;
    double deviation_sigmas = 0.0;
    bool pass = false;
};

// Loads the bundled scenarios and measurement tables, runs the decoy
// analysis per setup and grades the computed rates against the published
// references (|dev| <= 1 published sigma). Read-compute-emit: bundled data
// is never modified.
std::vector<ReproduceRow> run_reproduce(const std::filesystem::path& data_dir,
                                        double f, int n_samples, std::uint64_t seed);

std::string render_reproduce_table(const std::vector<ReproduceRow>& rows, char separator);

}  // namespace mdiqkd
