#include "mdiqkd/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdiqkd/common.hpp"

namespace mdiqkd {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot write file: " + path.string());
    out << content;
}

double require_number(const json& j, const char* field, const std::string& context) {
    if (!j.contains(field))
        throw config_error(context + ": missing field '" + field + "'");
    if (!j[field].is_number())
        throw config_error(context + ": field '" + field + "' must be a number");
    return j[field].get<double>();
}

double number_or(const json& j, const char* field, double fallback,
                 const std::string& context) {
    if (!j.contains(field)) return fallback;
    if (!j[field].is_number())
        throw config_error(context + ": field '" + field + "' must be a number");
    return j[field].get<double>();
}

FiberLink parse_link(const json& j, const std::string& context) {
    FiberLink link;
    link.length_km = require_number(j, "length_km", context);
    link.loss_db = require_number(j, "loss_db", context);
    try {
        link.validate();
    } catch (const config_error& e) {
        throw config_error(context + ": " + e.what());
    }
    return link;
}

SetupConfig parse_setup(const json& j) {
    SetupConfig s;
    if (!j.contains("name") || !j["name"].is_string())
        throw config_error("scenario entry: field 'name' must be a string");
    s.name = j["name"].get<std::string>();
    const std::string ctx = "setup '" + s.name + "'";

    if (j.contains("fiber")) s.fiber_kind = j["fiber"].get<std::string>();
    if (!j.contains("link_alice") || !j.contains("link_bob"))
        throw config_error(ctx + ": fields 'link_alice' and 'link_bob' are required");
    s.link_alice = parse_link(j["link_alice"], ctx + ".link_alice");
    s.link_bob = parse_link(j["link_bob"], ctx + ".link_bob");

    if (!j.contains("intensities"))
        throw config_error(ctx + ": field 'intensities' is required");
    const json& ji = j["intensities"];
    s.intensities.mu_signal = require_number(ji, "mu_signal", ctx + ".intensities");
    s.intensities.mu_decoy = number_or(ji, "mu_decoy", 0.05, ctx + ".intensities");

    if (j.contains("detector")) {
        const json& jd = j["detector"];
        DetectorModel& d = s.detector;
        d.efficiency = number_or(jd, "efficiency", d.efficiency, ctx + ".detector");
        d.dark_count_prob = number_or(jd, "dark_count_prob", d.dark_count_prob, ctx + ".detector");
        d.dead_time_us = number_or(jd, "dead_time_us", d.dead_time_us, ctx + ".detector");
        d.gate_rate_hz = number_or(jd, "gate_rate_hz", d.gate_rate_hz, ctx + ".detector");
        d.coincidence_separation_ns =
            number_or(jd, "coincidence_separation_ns", d.coincidence_separation_ns, ctx + ".detector");
        d.coincidence_tolerance_ns =
            number_or(jd, "coincidence_tolerance_ns", d.coincidence_tolerance_ns, ctx + ".detector");
    }
    if (j.contains("drift")) {
        const json& jd = j["drift"];
        DriftParams& p = s.drift;
        p.temp_period_s = number_or(jd, "temp_period_s", p.temp_period_s, ctx + ".drift");
        p.timing_sine_amp_ps = number_or(jd, "timing_sine_amp_ps", p.timing_sine_amp_ps, ctx + ".drift");
        p.timing_walk_ps_per_sqrt_s =
            number_or(jd, "timing_walk_ps_per_sqrt_s", p.timing_walk_ps_per_sqrt_s, ctx + ".drift");
        p.pol_sine_amp = number_or(jd, "pol_sine_amp", p.pol_sine_amp, ctx + ".drift");
        p.pol_walk_per_sqrt_s =
            number_or(jd, "pol_walk_per_sqrt_s", p.pol_walk_per_sqrt_s, ctx + ".drift");
        p.freq_rate_cap_mhz_per_hour =
            number_or(jd, "freq_rate_cap_mhz_per_hour", p.freq_rate_cap_mhz_per_hour, ctx + ".drift");
        p.pulse_fwhm_ps = number_or(jd, "pulse_fwhm_ps", p.pulse_fwhm_ps, ctx + ".drift");
    }
    if (j.contains("stabilizer")) {
        const json& js = j["stabilizer"];
        StabilizerConfig& c = s.stabilizer;
        if (js.contains("enabled")) c.enabled = js["enabled"].get<bool>();
        c.pol_period_s = number_or(js, "pol_period_s", c.pol_period_s, ctx + ".stabilizer");
        c.pol_holdoff_s = number_or(js, "pol_holdoff_s", c.pol_holdoff_s, ctx + ".stabilizer");
        c.timing_period_s = number_or(js, "timing_period_s", c.timing_period_s, ctx + ".stabilizer");
        c.timing_residual_bound_ps =
            number_or(js, "timing_residual_bound_ps", c.timing_residual_bound_ps, ctx + ".stabilizer");
        c.freq_threshold_mhz =
            number_or(js, "freq_threshold_mhz", c.freq_threshold_mhz, ctx + ".stabilizer");
        c.freq_worstcase_period_s =
            number_or(js, "freq_worstcase_period_s", c.freq_worstcase_period_s, ctx + ".stabilizer");
    }
    s.f_ec = number_or(j, "f_ec", s.f_ec, ctx);
    s.source_extinction = number_or(j, "source_extinction", s.source_extinction, ctx);
    s.drift_update_interval_s =
        number_or(j, "drift_update_interval_s", s.drift_update_interval_s, ctx);
    s.phase_nodes = static_cast<int>(number_or(j, "phase_nodes", s.phase_nodes, ctx));
    s.seed = static_cast<std::uint64_t>(number_or(j, "seed", static_cast<double>(s.seed), ctx));
    if (j.contains("reference")) {
        PublishedReference ref;
        ref.secret_key_rate = require_number(j["reference"], "secret_key_rate", ctx + ".reference");
        ref.sigma = require_number(j["reference"], "sigma", ctx + ".reference");
        s.reference = ref;
    }
    s.validate();
    return s;
}

void hash_feed(std::uint64_t& h, std::string_view text) {
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
}

void hash_feed(std::uint64_t& h, double v) { hash_feed(h, format_double(v)); }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

constexpr const char* kTableHeader = "setup,basis,intensity_a,intensity_b,Q,sigma_Q,e,sigma_e";

}  // namespace

std::filesystem::path default_data_dir() {
#ifdef MDIQKD_DEFAULT_DATA_DIR
    return std::filesystem::path(MDIQKD_DEFAULT_DATA_DIR);
#else
    return std::filesystem::path("data");
#endif
}

std::uint64_t config_hash(const SetupConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV offset basis
    hash_feed(h, c.name);
    hash_feed(h, c.fiber_kind);
    hash_feed(h, c.link_alice.length_km);
    hash_feed(h, c.link_alice.loss_db);
    hash_feed(h, c.link_bob.length_km);
    hash_feed(h, c.link_bob.loss_db);
    hash_feed(h, c.intensities.mu_signal);
    hash_feed(h, c.intensities.mu_decoy);
    hash_feed(h, c.detector.efficiency);
    hash_feed(h, c.detector.dark_count_prob);
    hash_feed(h, c.detector.dead_time_us);
    hash_feed(h, c.detector.gate_rate_hz);
    hash_feed(h, c.detector.coincidence_separation_ns);
    hash_feed(h, c.detector.coincidence_tolerance_ns);
    hash_feed(h, c.drift.temp_period_s);
    hash_feed(h, c.drift.timing_sine_amp_ps);
    hash_feed(h, c.drift.timing_walk_ps_per_sqrt_s);
    hash_feed(h, c.drift.pol_sine_amp);
    hash_feed(h, c.drift.pol_walk_per_sqrt_s);
    hash_feed(h, c.drift.freq_rate_cap_mhz_per_hour);
    hash_feed(h, c.drift.pulse_fwhm_ps);
    hash_feed(h, c.stabilizer.enabled ? 1.0 : 0.0);
    hash_feed(h, c.stabilizer.pol_period_s);
    hash_feed(h, c.stabilizer.pol_holdoff_s);
    hash_feed(h, c.stabilizer.timing_period_s);
    hash_feed(h, c.stabilizer.timing_residual_bound_ps);
    hash_feed(h, c.stabilizer.freq_threshold_mhz);
    hash_feed(h, c.stabilizer.freq_worstcase_period_s);
    hash_feed(h, c.f_ec);
    hash_feed(h, c.source_extinction);
    hash_feed(h, c.drift_update_interval_s);
    hash_feed(h, static_cast<double>(c.phase_nodes));
    hash_feed(h, static_cast<double>(c.seed));
    return h;
}

std::string config_hash_hex(const SetupConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config_hash(config)));
    return std::string(buf);
}

std::vector<SetupConfig> load_scenario(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    if (content.find_first_not_of(" \t\r\n") == std::string::npos) return {};

    json root;
    try {
        root = json::parse(content, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw config_error("scenario file " + path.string() + ": " + e.what());
    }
    const json* entries = nullptr;
    if (root.is_array()) {
        entries = &root;
    } else if (root.is_object() && root.contains("scenarios") && root["scenarios"].is_array()) {
        entries = &root["scenarios"];
    } else {
        throw config_error("scenario file " + path.string() +
                           ": expected an array or an object with a 'scenarios' array");
    }

    std::vector<SetupConfig> setups;
    for (const json& entry : *entries) setups.push_back(parse_setup(entry));
    for (std::size_t i = 0; i < setups.size(); ++i)
        for (std::size_t k = i + 1; k < setups.size(); ++k)
            if (setups[i].name == setups[k].name)
                throw config_error("duplicate setup name '" + setups[i].name + "' in scenario file");
    return setups;
}

const SetupConfig& find_setup(const std::vector<SetupConfig>& setups,
                              const std::string& name) {
    for (const SetupConfig& s : setups)
        if (s.name == name) return s;
    throw config_error("no setup named '" + name + "' in scenario file");
}

std::map<std::string, GainErrorTable> ingest_measurements(const std::filesystem::path& path) {
    const std::string content = read_file(path);
    std::map<std::string, GainErrorTable> tables;

    std::istringstream in(content);
    std::string line;
    bool header_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string ctx = path.string() + ":" + std::to_string(line_no);
        if (line.empty()) continue;
        if (line[0] == '#') {
            // optional directive: "# intensities <setup> mu_signal=<v> mu_decoy=<v>"
            std::istringstream ls(line.substr(1));
            std::string tag;
            ls >> tag;
            if (tag == "intensities") {
                std::string name, mus, mud;
                ls >> name >> mus >> mud;
                if (name.empty() || mus.rfind("mu_signal=", 0) != 0 || mud.rfind("mu_decoy=", 0) != 0)
                    throw config_error(ctx + ": malformed intensities directive");
                GainErrorTable& t = tables[name];
                t.intensities.mu_signal = parse_double(mus.substr(10), ctx + " mu_signal");
                t.intensities.mu_decoy = parse_double(mud.substr(9), ctx + " mu_decoy");
            }
            continue;
        }
        if (!header_seen) {
            if (line != kTableHeader)
                throw config_error(ctx + ": expected header '" + kTableHeader + "'");
            header_seen = true;
            continue;
        }
        const auto fields = split_csv(line);
        if (fields.size() != 8)
            throw config_error(ctx + ": expected 8 comma-separated fields, got " +
                               std::to_string(fields.size()));
        const std::string& name = fields[0];
        const Basis basis = basis_from_label(fields[1]);
        if (fields[2].size() != 1 || fields[3].size() != 1)
            throw config_error(ctx + ": intensity labels must be single characters");
        const IntensityClass ia = intensity_from_label(fields[2][0]);
        const IntensityClass ib = intensity_from_label(fields[3][0]);
        GainErrorRecord rec;
        rec.gain = parse_double(fields[4], ctx + " Q");
        rec.sigma_gain = parse_double(fields[5], ctx + " sigma_Q");
        const double e = parse_double(fields[6], ctx + " e");
        if (!std::isnan(e)) {
            if (!(e >= 0.0 && e <= 1.0))
                throw config_error(ctx + ": error rate must lie in [0, 1] or be nan");
            rec.error_rate = e;
        }
        rec.sigma_error = parse_double(fields[7], ctx + " sigma_e");
        if (!(rec.gain >= 0.0))
            throw config_error(ctx + ": gain must be >= 0");
        tables[name].set_cell(basis, ia, ib, rec);
    }
    if (!header_seen && !tables.empty())
        throw config_error(path.string() + ": intensities present but no data rows");
    return tables;
}

void write_measurements(const std::filesystem::path& path,
                        const std::map<std::string, GainErrorTable>& tables,
                        const std::string& provenance) {
    std::string out;
    out += "# mdiqkd gain/error table v1\n";
    out += "# tool_version " + std::string(kToolVersion) + "\n";
    if (!provenance.empty()) out += "# " + provenance + "\n";
    for (const auto& [name, table] : tables) {
        out += "# intensities " + name +
               " mu_signal=" + format_double(table.intensities.mu_signal) +
               " mu_decoy=" + format_double(table.intensities.mu_decoy) + "\n";
    }
    out += std::string(kTableHeader) + "\n";
    static constexpr IntensityClass kOrder[] = {IntensityClass::Signal,
                                                IntensityClass::Decoy,
                                                IntensityClass::Vacuum};
    for (const auto& [name, table] : tables) {
        for (Basis basis : {Basis::Z, Basis::X}) {
            for (IntensityClass ia : kOrder) {
                for (IntensityClass ib : kOrder) {
                    const auto& cell = table.cell(basis, ia, ib);
                    if (!cell) continue;
                    out += name;
                    out += ',';
                    out += basis_label(basis);
                    out += ',';
                    out += intensity_label(ia);
                    out += ',';
                    out += intensity_label(ib);
                    out += ',';
                    out += format_double(cell->gain);
                    out += ',';
                    out += format_double(cell->sigma_gain);
                    out += ',';
                    out += cell->error_rate ? format_double(*cell->error_rate) : "nan";
                    out += ',';
                    out += format_double(cell->sigma_error);
                    out += '\n';
                }
            }
        }
    }
    write_file(path, out);
}

ReportBundle analyze_table(const SetupConfig& config, const GainErrorTable& table,
                           int n_samples, std::uint64_t seed) {
    ReportBundle r;
    r.setup_name = config.name;
    r.config_hash_hex = config_hash_hex(config);
    r.seed = seed;
    r.table = table;
    r.result = secret_key_rate(table, config.f_ec);
    r.result.sigma = propagate_uncertainty(table, config.f_ec, n_samples, seed).sigma;
    r.duty_fraction = duty_fraction(config.stabilizer);
    return r;
}

std::string render_report(const ReportBundle& r) {
    std::ostringstream out;
    out << "setup " << r.setup_name << " (config " << r.config_hash_hex << ", seed "
        << r.seed << ", tool " << r.tool_version << ")\n";
    out << "  Q11_z lower bound : " << format_double(r.result.bounds.q11_z_lower)
        << (r.result.bounds.q11_z_clamped ? "  [clamped]" : "") << "\n";
    out << "  Q11_x lower bound : " << format_double(r.result.bounds.q11_x_lower)
        << (r.result.bounds.q11_x_clamped ? "  [clamped]" : "") << "\n";
    out << "  e11_x upper bound : " << format_double(r.result.bounds.e11_x_upper);
    if (r.result.bounds.e11_uncertified) out << "  [uncertified]";
    else if (r.result.bounds.e11_exceeds_half) out << "  [exceeds 0.5]";
    else if (r.result.bounds.e11_clamped) out << "  [clamped]";
    out << "\n";
    out << "  Q_ss^z / e_ss^z   : " << format_double(r.result.q_ss_z) << " / "
        << format_double(r.result.e_ss_z) << "\n";
    out << "  f                 : " << format_double(r.result.f) << "\n";
    out << "  S (bits per gate) : " << format_double(r.result.secret_key_rate)
        << " +- " << format_double(r.result.sigma)
        << (r.result.first_term_zeroed ? "  [single-photon term zeroed]" : "") << "\n";
    if (r.duty_fraction != 1.0 || r.wall_clock_seconds != 0.0) {
        out << "  duty fraction     : " << format_double(r.duty_fraction) << "\n";
        if (r.wall_clock_seconds != 0.0) {
            out << "  dead-time usage   : " << format_double(r.dead_time_utilization) << "\n";
            out << "  est. wall clock   : " << format_double(r.wall_clock_seconds) << " s\n";
        }
    }
    return out.str();
}

std::vector<ReproduceRow> run_reproduce(const std::filesystem::path& data_dir,
                                        double f, int n_samples, std::uint64_t seed) {
    const auto setups = load_scenario(data_dir / "scenarios.json");
    if (setups.empty())
        throw config_error("bundled scenario file is empty: " + (data_dir / "scenarios.json").string());
    auto tables = ingest_measurements(data_dir / "measurements.csv");

    std::vector<ReproduceRow> rows;
    for (const SetupConfig& setup : setups) {
        auto it = tables.find(setup.name);
        if (it == tables.end())
            throw config_error("bundled measurements are missing setup '" + setup.name + "'");
        if (!setup.reference)
            throw config_error("setup '" + setup.name + "' has no published reference rate");
        GainErrorTable& table = it->second;
        if (std::abs(table.intensities.mu_signal - setup.intensities.mu_signal) > 1e-12 ||
            std::abs(table.intensities.mu_decoy - setup.intensities.mu_decoy) > 1e-12)
            throw config_error("setup '" + setup.name +
                               "': scenario and measurement intensities disagree");
        const SecretKeyResult point = secret_key_rate(table, f);
        const SecretKeyResult mc =
            propagate_uncertainty(table, f, n_samples, mix_seed(seed, rows.size()));

        ReproduceRow row;
        row.setup_name = setup.name;
        row.total_loss_db = setup.total_loss_db();
        row.computed_s = point.secret_key_rate;
        row.computed_sigma = mc.sigma;
        row.published_s = setup.reference->secret_key_rate;
        row.published_sigma = setup.reference->sigma;
        row.deviation_sigmas = row.published_sigma > 0.0
                                   ? std::abs(row.computed_s - row.published_s) / row.published_sigma
                                   : 0.0;
        row.pass = std::abs(row.computed_s - row.published_s) <= row.published_sigma;
        rows.push_back(row);
    }
    return rows;
}

std::string render_reproduce_table(const std::vector<ReproduceRow>& rows, char separator) {
    std::ostringstream out;
    if (separator == ',') {
        out << "setup,total_loss_db,S_computed,sigma_computed,S_published,sigma_published,deviation_sigmas,status\n";
        for (const auto& r : rows) {
            out << r.setup_name << ',' << format_double(r.total_loss_db) << ','
                << format_double(r.computed_s) << ',' << format_double(r.computed_sigma) << ','
                << format_double(r.published_s) << ',' << format_double(r.published_sigma) << ','
                << format_double(r.deviation_sigmas) << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
        }
        return out.str();
    }
    out << "setup      loss[dB]  S computed    sigma(MC)     S published   sigma(pub)    |dev|/sigma  status\n";
    for (const auto& r : rows) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%-10s %-9.1f %-13.4g %-13.2g %-13.3g %-13.2g %-12.2f %s\n",
                      r.setup_name.c_str(), r.total_loss_db, r.computed_s, r.computed_sigma,
                      r.published_s, r.published_sigma, r.deviation_sigmas,
                      r.pass ? "PASS" : "FAIL");
        out << buf;
    }
    return out.str();
}

}  // namespace mdiqkd
