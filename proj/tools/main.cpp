#include "hawkes/config.hpp"
#include "hawkes/error.hpp"
#include "hawkes/estimate.hpp"
#include "hawkes/events.hpp"
#include "hawkes/likelihood.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/sparsity_test.hpp"
#include "hawkes/volterra.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef HAWKES_VERSION
#define HAWKES_VERSION "0.0.0"
#endif

namespace {

using hawkes::InvalidInput;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitUnstable = 4;

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, end};
}

std::vector<hawkes::Entry> parse_pattern(std::string_view text, std::size_t K) {
    std::vector<hawkes::Entry> entries;
    std::string item;
    std::stringstream in{std::string(text)};
    while (std::getline(in, item, ';')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        const auto comma = item.find(',');
        if (comma == std::string::npos) throw InvalidInput("pattern item '" + item + "' is not 'k,l'");
        std::size_t k = 0;
        std::size_t l = 0;
        try {
            std::size_t used = 0;
            k = std::stoul(item.substr(0, comma), &used);
            l = std::stoul(item.substr(comma + 1), &used);
        } catch (const std::exception&) {
            throw InvalidInput("pattern item '" + item + "' is not 'k,l'");
        }
        if (k < 1 || l < 1 || k > K || l > K)
            throw hawkes::InfeasiblePattern("pattern entry (" + std::to_string(k) + "," + std::to_string(l) +
                                            ") lies outside the " + std::to_string(K) + "x" + std::to_string(K) +
                                            " adjacency");
        entries.emplace_back(k - 1, l - 1);
    }
    return entries;
}

std::vector<double> parse_alpha_grid(std::string_view text) {
    std::vector<double> parts;
    std::string item;
    std::stringstream in{std::string(text)};
    while (std::getline(in, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw InvalidInput("alpha grid '" + std::string(text) + "' is not start:step:count");
        }
    }
    if (parts.size() != 3 || parts[2] < 1 || parts[2] != std::floor(parts[2]) || parts[0] < 0)
        throw InvalidInput("alpha grid '" + std::string(text) + "' is not start:step:count");
    std::vector<double> grid;
    for (std::size_t i = 0; i < static_cast<std::size_t>(parts[2]); ++i)
        grid.push_back(parts[0] + static_cast<double>(i) * parts[1]);
    return grid;
}

std::vector<double> parse_numbers(std::string_view text, char delimiter) {
    std::vector<double> out;
    std::string item;
    std::stringstream in{std::string(text)};
    while (std::getline(in, item, delimiter)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw InvalidInput("'" + item + "' is not a number");
        }
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

json validation_json(const hawkes::ValidationReport& report) {
    return {{"stable", report.stable}, {"spectral_radius", report.spectral_radius}, {"messages", report.messages}};
}

/// Collects what a run read and wrote and writes the manifest next to the main output.
class Manifest {
public:
    Manifest(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed) {}

    void input(const std::string& role, const std::string& path, const std::string& bytes) {
        inputs_.push_back({{"role", role}, {"path", path}, {"sha256", sha256_hex(bytes)}});
    }
    void output(const std::string& path, const std::string& bytes) {
        outputs_.push_back({{"path", path}, {"sha256", sha256_hex(bytes)}});
    }
    void set(const std::string& key, json value) { extra_[key] = std::move(value); }

    void write(const std::filesystem::path& path) const {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json j = {{"command", command_},
                  {"seed", seed_},
                  {"version", HAWKES_VERSION},
                  {"wall_time_seconds", wall},
                  {"inputs", inputs_},
                  {"outputs", outputs_}};
        for (const auto& [k, v] : extra_.items()) j[k] = v;
        write_file(path, j.dump(2) + "\n");
    }

private:
    std::string command_;
    std::uint64_t seed_;
    json inputs_ = json::array();
    json outputs_ = json::array();
    json extra_ = json::object();
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct LoadedConfig {
    std::string path;
    std::string bytes;
    hawkes::ModelConfig config;
};

LoadedConfig load_config(const std::string& path) {
    std::string bytes = hawkes::read_text_file(path);
    try {
        auto config = hawkes::parse_model_config(bytes);
        return {path, std::move(bytes), std::move(config)};
    } catch (const hawkes::Error& e) {
        throw InvalidInput(path + ": " + e.what());
    }
}

hawkes::ParamVector require_theta(const LoadedConfig& c, const std::string& inline_theta) {
    if (!inline_theta.empty()) return hawkes::parse_inline_theta(c.config.spec, inline_theta);
    if (!c.config.theta) throw InvalidInput(c.path + ": no [theta] section and no --theta given");
    return *c.config.theta;
}

hawkes::FitOptions fit_options(const hawkes::FitProfile& profile, std::uint64_t seed, unsigned threads,
                               std::size_t n_starts) {
    hawkes::FitOptions o;
    if (profile.n_starts) o.n_starts = *profile.n_starts;
    if (profile.zero_threshold) o.zero_threshold = *profile.zero_threshold;
    if (n_starts > 0) o.n_starts = n_starts;
    o.start_seed = seed;
    o.threads = threads;
    return o;
}

hawkes::Dataset load_dataset(const std::string& path, const hawkes::ModelSpec& spec, std::string& bytes) {
    bytes = hawkes::read_text_file(path);
    std::istringstream in(bytes);
    hawkes::Dataset data = [&] {
        try {
            return hawkes::read_jsonl(in);
        } catch (const hawkes::HorizonMismatch&) {
            throw;
        } catch (const hawkes::Error& e) {
            throw InvalidInput(path + ": " + e.what());
        }
    }();
    if (data.horizons() != spec.horizons())
        throw hawkes::HorizonMismatch(path + ": dataset horizons differ from the model horizons");
    for (const auto& r : data.replicates())
        for (const auto& e : r.events())
            if (!spec.marks().marked() && e.x != 1.0) throw InvalidInput(path + ": marks given for an unmarked model");
    return data;
}

std::optional<hawkes::ChiBarMixture> parse_weights(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return hawkes::ChiBarMixture::from_weights(parse_numbers(text, ','));
}

struct Common {
    std::string config;
    std::string fit_config;
    std::string out;
    std::string theta;
    std::string pattern;
    std::string method{"known"};
    std::string weights;
    std::uint64_t seed{0};
    std::size_t n{0};
    std::size_t reps{0};
    std::size_t mc_draws{100'000};
    std::size_t n_starts{0};
    unsigned threads{1};
    std::string levels{"0.05"};
};

int cmd_simulate(const Common& a) {
    const auto cfg = load_config(a.config);
    const auto& spec = cfg.config.spec;
    const auto theta = require_theta(cfg, a.theta);
    const auto report = hawkes::validate(spec, theta);
    if (!spec.within_bounds(theta.values)) throw InvalidInput("theta lies outside the configured bounds");
    if (!report.stable)
        std::cerr << "warning: spectral radius " << report.spectral_radius
                  << " >= 1; simulating on the finite horizon anyway\n";
    hawkes::SimulationOptions sim;
    sim.threads = a.threads;
    const auto data = hawkes::simulate_dataset(spec, theta, a.n, a.seed, sim);
    std::ostringstream body;
    hawkes::write_jsonl(body, data, spec.marks().marked());
    write_file(a.out, body.str());

    Manifest m("simulate", a.seed);
    m.input("config", cfg.path, cfg.bytes);
    m.output(a.out, body.str());
    m.set("n", a.n);
    m.set("total_events", data.total_events());
    m.set("validation", validation_json(report));
    m.write(a.out + ".manifest.json");
    return kExitOk;
}

int cmd_fit(const Common& a, const std::string& data_path, const std::string& strategy_name) {
    const auto cfg = load_config(a.config);
    const auto& spec = cfg.config.spec;
    std::string data_bytes;
    const auto data = load_dataset(data_path, spec, data_bytes);
    const auto strategy = hawkes::strategy_from_string(strategy_name);
    const auto pinned = spec.pattern_slots(parse_pattern(a.pattern, spec.dimension()));
    const auto options = fit_options(cfg.config.fit, a.seed, a.threads, a.n_starts);
    const auto result = hawkes::fit_strategy(strategy, data, spec, pinned, options);
    const auto report = hawkes::validate(spec, result.theta);

    json j = hawkes::to_json(result, spec);
    j["validation"] = validation_json(report);
    const std::string body = j.dump(2) + "\n";
    write_file(a.out, body);

    Manifest m("fit", a.seed);
    m.input("config", cfg.path, cfg.bytes);
    m.input("data", data_path, data_bytes);
    m.output(a.out, body);
    m.set("validation", validation_json(report));
    m.write(a.out + ".manifest.json");
    if (!result.converged) {
        std::cerr << "error: the fit did not converge (projected gradient " << result.projected_gradient << ")\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

hawkes::TestOptions test_options(const Common& a, const hawkes::FitProfile& profile, double level) {
    hawkes::TestOptions t;
    t.method = hawkes::test_method_from_string(a.method);
    t.level = level;
    if (profile.lrs_threshold) t.epsilon = *profile.lrs_threshold;
    t.fit = fit_options(profile, a.seed, a.threads, a.n_starts);
    t.mc_draws = a.mc_draws;
    t.mc_seed = a.seed;
    t.weights = parse_weights(a.weights);
    return t;
}

int cmd_test(const Common& a, const std::string& data_path, double level) {
    const auto cfg = load_config(a.config);
    const auto& spec = cfg.config.spec;
    std::string data_bytes;
    const auto data = load_dataset(data_path, spec, data_bytes);
    const auto tested = spec.pattern_slots(parse_pattern(a.pattern, spec.dimension()));
    if (tested.empty()) throw InvalidInput("--pattern must name at least one adjacency entry");
    const auto options = test_options(a, cfg.config.fit, level);
    const auto ctx = hawkes::LikelihoodContext::aggregated(spec, data);
    const auto result = hawkes::run_test(ctx, tested, options);

    json j = hawkes::to_json(result, spec);
    const std::string body = j.dump(2) + "\n";
    write_file(a.out, body);

    Manifest m("test", a.seed);
    m.input("config", cfg.path, cfg.bytes);
    m.input("data", data_path, data_bytes);
    m.output(a.out, body);
    m.set("validation", validation_json(hawkes::validate(spec, result.full->theta)));
    m.write(a.out + ".manifest.json");
    if (!result.full->converged || !result.null->converged) {
        std::cerr << "error: a fit did not converge\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

struct Harness {
    LoadedConfig sim;
    std::optional<LoadedConfig> fit;
    hawkes::ParamVector theta;
    std::vector<std::size_t> tested;
    hawkes::CalibrationOptions options;

    [[nodiscard]] const hawkes::ModelSpec& fit_spec() const { return fit ? fit->config.spec : sim.config.spec; }
};

Harness make_harness(const Common& a) {
    Harness h{load_config(a.config), std::nullopt, {}, {}, {}};
    if (!a.fit_config.empty()) h.fit.emplace(load_config(a.fit_config));
    h.theta = require_theta(h.sim, a.theta);
    const auto& fit_spec = h.fit_spec();
    h.tested = fit_spec.pattern_slots(parse_pattern(a.pattern, fit_spec.dimension()));
    if (h.tested.empty()) throw InvalidInput("--pattern must name at least one adjacency entry");
    if (fit_spec.horizons() != h.sim.config.spec.horizons())
        throw hawkes::HorizonMismatch("fit and simulation models have different horizons");
    const auto levels = parse_numbers(a.levels, ',');
    if (levels.empty()) throw InvalidInput("--level needs at least one value");
    const auto& profile = h.fit ? h.fit->config.fit : h.sim.config.fit;
    h.options.n = a.n;
    h.options.reps = a.reps;
    h.options.seed = a.seed;
    h.options.levels = levels;
    h.options.test = test_options(a, profile, levels.front());
    h.options.test.fit.threads = 1;
    h.options.threads = a.threads;
    return h;
}

void record_inputs(Manifest& m, const Harness& h) {
    m.input("config", h.sim.path, h.sim.bytes);
    if (h.fit) m.input("fit_config", h.fit->path, h.fit->bytes);
    m.set("validation", validation_json(hawkes::validate(h.sim.config.spec, h.theta)));
}

int cmd_calibrate(const Common& a, const std::string& prefix) {
    auto h = make_harness(a);
    const auto& sim_spec = h.sim.config.spec;
    for (std::size_t s : h.tested) {
        const auto i = sim_spec.slot_index(h.fit_spec().slot(s).name);
        if (h.theta.values[static_cast<Eigen::Index>(i)] != 0.0)
            throw InvalidInput("calibration needs theta0 in the null: slot '" + sim_spec.slot(i).name + "' is not 0");
    }
    const auto report = hawkes::calibrate_level(sim_spec, h.theta, h.fit_spec(), h.tested, h.options);

    std::string level_csv = "level,rate,se\n";
    for (const auto& row : report.levels)
        level_csv += format_double(row.level) + "," + format_double(row.rate) + "," + format_double(row.se) + "\n";
    std::string qq_csv = "q_empirical,q_theoretical\n";
    for (const auto& [e, t] : report.qq) qq_csv += format_double(e) + "," + format_double(t) + "\n";
    json strata = json::array();
    for (const auto& s : report.strata) strata.push_back({{"zeros", s.zeros}, {"members", s.members}, {"rate", s.rate}});
    json summary = {{"reps", report.reps},
                    {"completed", report.completed},
                    {"excluded", report.excluded},
                    {"failed", report.failed},
                    {"zero_mass", report.zero_mass},
                    {"zero_count_frequency", report.zero_count_frequency},
                    {"strata", strata},
                    {"reference_weights", report.reference.weights},
                    {"reference_source", std::string(hawkes::to_string(report.reference.source))},
                    {"ks_conditional", report.ks_conditional},
                    {"method", a.method}};
    const std::string summary_body = summary.dump(2) + "\n";

    const std::string level_path = prefix + "_level.csv";
    const std::string qq_path = prefix + "_qq.csv";
    const std::string summary_path = prefix + "_summary.json";
    write_file(level_path, level_csv);
    write_file(qq_path, qq_csv);
    write_file(summary_path, summary_body);

    Manifest m("calibrate", a.seed);
    record_inputs(m, h);
    m.output(level_path, level_csv);
    m.output(qq_path, qq_csv);
    m.output(summary_path, summary_body);
    m.set("excluded", report.excluded);
    m.write(prefix + ".manifest.json");
    if (report.failed) {
        std::cerr << "error: " << report.excluded << " of " << report.reps
                  << " replicates were excluded for non-convergence (cap 1%)\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

int cmd_power(const Common& a, const std::string& grid_text) {
    auto h = make_harness(a);
    const auto grid = parse_alpha_grid(grid_text);
    const auto rows = hawkes::power_curve(h.sim.config.spec, h.theta, h.fit_spec(), h.tested, grid, h.options);
    std::string csv = "alpha,power,se\n";
    std::size_t excluded = 0;
    std::size_t reps = 0;
    for (const auto& r : rows) {
        csv += format_double(r.alpha) + "," + format_double(r.power) + "," + format_double(r.se) + "\n";
        excluded += r.excluded;
        reps += r.completed + r.excluded;
    }
    write_file(a.out, csv);

    Manifest m("power", a.seed);
    record_inputs(m, h);
    m.output(a.out, csv);
    m.set("excluded", excluded);
    m.write(a.out + ".manifest.json");
    if (static_cast<double>(excluded) >= 0.01 * static_cast<double>(reps) && excluded > 0) {
        std::cerr << "error: " << excluded << " of " << reps << " replicates were excluded for non-convergence\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

hawkes::ParamVector theta_from_argument(const hawkes::ModelSpec& spec, const std::string& arg) {
    namespace fs = std::filesystem;
    if (!fs::exists(arg)) return hawkes::parse_inline_theta(spec, arg);
    const std::string text = hawkes::read_text_file(arg);
    if (fs::path(arg).extension() == ".json") {
        json j;
        try {
            j = json::parse(text);
        } catch (const json::exception& e) {
            throw InvalidInput(arg + ": " + e.what());
        }
        const json& obj = j.contains("theta") ? j["theta"] : j;
        if (!obj.is_object()) throw InvalidInput(arg + ": expected a theta object");
        std::map<std::string, double> named;
        for (const auto& [k, v] : obj.items()) {
            if (!v.is_number()) throw InvalidInput(arg + ": theta value for '" + k + "' is not a number");
            named[k] = v.get<double>();
        }
        return spec.make_params(named);
    }
    auto other = hawkes::parse_model_config(text);
    if (!other.theta) throw InvalidInput(arg + ": no [theta] section");
    return spec.make_params(other.spec.named_values(other.theta->values));
}

int cmd_info(const Common& a, double step) {
    const auto cfg = load_config(a.config);
    const auto& spec = cfg.config.spec;
    const auto theta = a.theta.empty() ? require_theta(cfg, "") : theta_from_argument(spec, a.theta);
    const auto report = hawkes::validate(spec, theta);
    if (!report.stable) {
        std::cerr << "error: spectral radius " << report.spectral_radius
                  << " >= 1; the asymptotic information needs a stable model\n";
        return kExitUnstable;
    }
    const auto info = hawkes::asymptotic_information(spec, theta.values, step);
    json matrix = json::array();
    for (Eigen::Index r = 0; r < info.information.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < info.information.cols(); ++c) row.push_back(info.information(r, c));
        matrix.push_back(std::move(row));
    }
    json slots = json::array();
    for (const auto& s : spec.slots()) slots.push_back(s.name);
    json j = {{"slots", slots},
              {"information", matrix},
              {"spectral_radius", info.spectral_radius},
              {"min_eigenvalue", info.min_eigenvalue},
              {"max_eigenvalue", info.max_eigenvalue},
              {"degenerate", info.degenerate}};
    const std::string body = j.dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << body;
        return kExitOk;
    }
    write_file(a.out, body);
    Manifest m("info", 0);
    m.input("config", cfg.path, cfg.bytes);
    m.output(a.out, body);
    m.set("validation", validation_json(report));
    m.write(a.out + ".manifest.json");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparsity tests for multivariate Hawkes processes observed as many short replicates"};
    app.require_subcommand(1);
    Common a;
    std::string data_path;
    std::string strategy{"aggregate"};
    std::string prefix;
    std::string grid;
    double level = 0.05;
    double step = 0.0;

    auto add_threads = [&](CLI::App* s) { s->add_option("--threads", a.threads, "Worker cap")->capture_default_str(); };

    auto* simulate = app.add_subcommand("simulate", "Simulate n replicates");
    simulate->add_option("--config", a.config)->required();
    simulate->add_option("--n", a.n)->required()->check(CLI::PositiveNumber);
    simulate->add_option("--seed", a.seed)->required();
    simulate->add_option("--out", a.out)->required();
    simulate->add_option("--theta", a.theta, "Inline name=value list overriding [theta]");
    add_threads(simulate);

    auto* fit = app.add_subcommand("fit", "Maximum-likelihood fit");
    fit->add_option("--data", data_path)->required();
    fit->add_option("--config", a.config)->required();
    fit->add_option("--pattern", a.pattern, "Entries pinned to zero, 'k,l;k,l' (1-based)");
    fit->add_option("--strategy", strategy)->check(CLI::IsMember({"aggregate", "pooled", "averaged"}));
    fit->add_option("--out", a.out)->required();
    fit->add_option("--seed", a.seed, "Start seed");
    fit->add_option("--n-starts", a.n_starts);
    add_threads(fit);

    auto* test = app.add_subcommand("test", "Likelihood-ratio sparsity test");
    test->add_option("--data", data_path)->required();
    test->add_option("--config", a.config)->required();
    test->add_option("--pattern", a.pattern)->required();
    test->add_option("--method", a.method)->check(CLI::IsMember({"known", "conditional", "mc"}));
    test->add_option("--mc-draws", a.mc_draws);
    test->add_option("--level", level)->check(CLI::Range(0.0, 1.0));
    test->add_option("--weights", a.weights, "Mixture weights w0,...,wp for the known-weights method");
    test->add_option("--out", a.out)->required();
    test->add_option("--seed", a.seed);
    test->add_option("--n-starts", a.n_starts);
    add_threads(test);

    auto* calibrate = app.add_subcommand("calibrate", "Monte Carlo level calibration under the null");
    calibrate->add_option("--config", a.config)->required();
    calibrate->add_option("--fit-config", a.fit_config, "Model fitted to the simulated data");
    calibrate->add_option("--theta", a.theta);
    calibrate->add_option("--pattern", a.pattern)->required();
    calibrate->add_option("--n", a.n)->required()->check(CLI::PositiveNumber);
    calibrate->add_option("--reps", a.reps)->required()->check(CLI::PositiveNumber);
    calibrate->add_option("--method", a.method)->check(CLI::IsMember({"known", "conditional", "mc"}));
    calibrate->add_option("--level", a.levels, "Comma-separated nominal levels");
    calibrate->add_option("--mc-draws", a.mc_draws);
    calibrate->add_option("--weights", a.weights);
    calibrate->add_option("--seed", a.seed)->required();
    calibrate->add_option("--n-starts", a.n_starts);
    calibrate->add_option("--out-prefix", prefix)->required();
    add_threads(calibrate);

    auto* power = app.add_subcommand("power", "Monte Carlo power curve");
    power->add_option("--config", a.config)->required();
    power->add_option("--fit-config", a.fit_config);
    power->add_option("--theta", a.theta);
    power->add_option("--pattern", a.pattern)->required();
    power->add_option("--alpha-grid", grid, "start:step:count")->required();
    power->add_option("--n", a.n)->required()->check(CLI::PositiveNumber);
    power->add_option("--reps", a.reps)->required()->check(CLI::PositiveNumber);
    power->add_option("--level", a.levels);
    power->add_option("--method", a.method)->check(CLI::IsMember({"known", "conditional", "mc"}));
    power->add_option("--mc-draws", a.mc_draws);
    power->add_option("--weights", a.weights);
    power->add_option("--seed", a.seed)->required();
    power->add_option("--n-starts", a.n_starts);
    power->add_option("--out", a.out)->required();
    add_threads(power);

    auto* info = app.add_subcommand("info", "Asymptotic information at theta");
    info->add_option("--config", a.config)->required();
    info->add_option("--theta", a.theta, "Inline name=value list, a TOML file with [theta], or a fit JSON");
    info->add_option("--step", step, "Volterra grid step (default horizon/4096)");
    info->add_option("--out", a.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*simulate) return cmd_simulate(a);
        if (*fit) return cmd_fit(a, data_path, strategy);
        if (*test) return cmd_test(a, data_path, level);
        if (*calibrate) return cmd_calibrate(a, prefix);
        if (*power) return cmd_power(a, grid);
        if (*info) return cmd_info(a, step);
    } catch (const hawkes::NonConvergence& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const hawkes::NestingViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const hawkes::Unstable& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnstable;
    } catch (const hawkes::Runaway& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUnstable;
    } catch (const hawkes::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitInvalid;
}
