#include "hawkes/config.hpp"

#include "hawkes/error.hpp"
#include "hawkes/toml_lite.hpp"

#include <algorithm>
#include <charconv>
#include <initializer_list>
#include <fstream>
#include <sstream>

namespace hawkes {

namespace {

std::vector<std::string> string_list(const toml::Value& v, std::string_view context) {
    std::vector<std::string> out;
    for (const auto& item : v.as_array(context)) out.push_back(item.as_string(context));
    return out;
}

std::vector<std::vector<std::string>> string_matrix(const toml::Value& v, std::string_view context) {
    std::vector<std::vector<std::string>> out;
    for (const auto& row : v.as_array(context)) out.push_back(string_list(row, context));
    return out;
}

std::vector<double> number_list(const toml::Value& v, std::string_view context) {
    std::vector<double> out;
    for (const auto& item : v.as_array(context)) out.push_back(item.as_number(context));
    return out;
}

toml::Value to_value(const std::vector<std::string>& list) {
    toml::Array a;
    for (const auto& s : list) a.push_back(toml::Value{s});
    return toml::Value{std::move(a)};
}

toml::Value to_value(const std::vector<double>& list) {
    toml::Array a;
    for (double d : list) a.push_back(toml::Value{d});
    return toml::Value{std::move(a)};
}

MarkWeight mark_weight_from(std::string_view s) {
    if (s == "unit") return MarkWeight::unit;
    if (s == "identity") return MarkWeight::identity;
    if (s == "truncated_identity") return MarkWeight::truncated_identity;
    throw InvalidInput("unknown mark weight '" + std::string(s) + "'");
}

MarkDistribution mark_distribution_from(std::string_view s) {
    if (s == "none") return MarkDistribution::none;
    if (s == "half_normal_offset") return MarkDistribution::half_normal_offset;
    if (s == "custom_empirical") return MarkDistribution::custom_empirical;
    throw InvalidInput("unknown mark distribution '" + std::string(s) + "'");
}

BaselineFamily baseline_from(std::string_view s) {
    if (s == "constant") return BaselineFamily::constant;
    if (s == "exponential_time") return BaselineFamily::exponential_time;
    throw InvalidInput("unknown baseline family '" + std::string(s) + "'");
}

std::size_t to_count(double v, std::string_view context) {
    if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw InvalidInput(std::string(context) + ": expected a positive integer");
    return static_cast<std::size_t>(v);
}

void check_keys(const toml::Table& table, std::initializer_list<std::string_view> allowed, std::string_view section) {
    for (const auto& [key, value] : table.entries)
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw InvalidInput("unknown key '" + key + "' in [" + std::string(section) + "]");
}

} // namespace

ModelConfig parse_model_config(std::string_view text) {
    const toml::Document doc = toml::parse(text);
    for (const auto& [name, table] : doc.sections) {
        if (name.empty()) check_keys(table, {}, "top level");
        else if (name == "model") check_keys(table, {"dimension", "horizons"}, name);
        else if (name == "baseline") check_keys(table, {"family", "level", "growth"}, name);
        else if (name == "kernel") check_keys(table, {"family", "adjacency", "decay"}, name);
        else if (name == "marks") check_keys(table, {"weight", "cap", "distribution", "offset", "values"}, name);
        else if (name == "fit") check_keys(table, {"n_starts", "zero_threshold", "lrs_threshold"}, name);
        else if (name != "bounds" && name != "theta") throw InvalidInput("unknown section [" + name + "]");
    }
    auto section = [&](std::string_view name) -> const toml::Table& {
        if (const auto* t = doc.find(name)) return *t;
        throw InvalidInput("missing section [" + std::string(name) + "]");
    };

    ModelDescription d;
    const auto& model = section("model");
    d.horizons = number_list(model.at("horizons", "model"), "model.horizons");
    if (const auto* dim = model.find("dimension")) {
        if (to_count(dim->as_number("model.dimension"), "model.dimension") != d.horizons.size())
            throw InvalidInput("model.dimension does not match the number of horizons");
    }

    const auto& baseline = section("baseline");
    d.baseline = baseline_from(baseline.at("family", "baseline").as_string("baseline.family"));
    d.level_slots = string_list(baseline.at("level", "baseline"), "baseline.level");
    if (const auto* g = baseline.find("growth")) d.growth_slots = string_list(*g, "baseline.growth");

    const auto& kernel = section("kernel");
    d.kernel = kernel_family_from_string(kernel.at("family", "kernel").as_string("kernel.family"));
    d.adjacency = string_matrix(kernel.at("adjacency", "kernel"), "kernel.adjacency");
    d.decay = string_matrix(kernel.at("decay", "kernel"), "kernel.decay");

    if (const auto* marks = doc.find("marks")) {
        if (const auto* w = marks->find("weight")) d.marks.weight = mark_weight_from(w->as_string("marks.weight"));
        if (const auto* c = marks->find("cap")) d.marks.cap = c->as_number("marks.cap");
        if (const auto* dist = marks->find("distribution"))
            d.marks.distribution = mark_distribution_from(dist->as_string("marks.distribution"));
        if (const auto* o = marks->find("offset")) d.marks.offset = o->as_number("marks.offset");
        if (const auto* v = marks->find("values")) d.marks.values = number_list(*v, "marks.values");
    }

    if (const auto* bounds = doc.find("bounds")) {
        for (const auto& [name, value] : bounds->entries) {
            const auto b = number_list(value, "bounds." + name);
            if (b.size() != 2) throw InvalidInput("bounds." + name + " must be [lower, upper]");
            d.bounds[name] = {b[0], b[1]};
        }
    }

    ModelConfig cfg{ModelSpec(std::move(d)), std::nullopt, {}};

    if (const auto* theta = doc.find("theta")) {
        std::map<std::string, double> named;
        for (const auto& [name, value] : theta->entries) named[name] = value.as_number("theta." + name);
        cfg.theta = cfg.spec.make_params(named);
    }
    if (const auto* fit = doc.find("fit")) {
        if (const auto* v = fit->find("n_starts")) cfg.fit.n_starts = to_count(v->as_number("fit.n_starts"), "fit.n_starts");
        if (const auto* v = fit->find("zero_threshold")) cfg.fit.zero_threshold = v->as_number("fit.zero_threshold");
        if (const auto* v = fit->find("lrs_threshold")) cfg.fit.lrs_threshold = v->as_number("fit.lrs_threshold");
    }
    return cfg;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ModelConfig load_model_config(const std::filesystem::path& path) {
    try {
        return parse_model_config(read_text_file(path));
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

std::string serialize_model_config(const ModelSpec& spec, const std::optional<ParamVector>& theta, const FitProfile& fit) {
    const auto& d = spec.description();
    toml::Document doc;

    auto& model = doc.section("model");
    model.set("dimension", toml::Value{static_cast<double>(spec.dimension())});
    model.set("horizons", to_value(d.horizons));

    auto& baseline = doc.section("baseline");
    baseline.set("family", toml::Value{std::string(to_string(d.baseline))});
    baseline.set("level", to_value(d.level_slots));
    if (!d.growth_slots.empty()) baseline.set("growth", to_value(d.growth_slots));

    auto& kernel = doc.section("kernel");
    kernel.set("family", toml::Value{std::string(to_string(d.kernel))});
    toml::Array adjacency, decay;
    for (const auto& row : d.adjacency) adjacency.push_back(to_value(row));
    for (const auto& row : d.decay) decay.push_back(to_value(row));
    kernel.set("adjacency", toml::Value{std::move(adjacency)});
    kernel.set("decay", toml::Value{std::move(decay)});

    auto& marks = doc.section("marks");
    marks.set("weight", toml::Value{std::string(to_string(d.marks.weight))});
    if (d.marks.weight == MarkWeight::truncated_identity) marks.set("cap", toml::Value{d.marks.cap});
    marks.set("distribution", toml::Value{std::string(to_string(d.marks.distribution))});
    if (d.marks.distribution == MarkDistribution::half_normal_offset) marks.set("offset", toml::Value{d.marks.offset});
    if (d.marks.distribution == MarkDistribution::custom_empirical) marks.set("values", to_value(d.marks.values));

    auto& bounds = doc.section("bounds");
    for (const auto& s : spec.slots()) bounds.set(s.name, to_value(std::vector<double>{s.lower, s.upper}));

    if (theta) {
        auto& t = doc.section("theta");
        for (std::size_t i = 0; i < spec.num_params(); ++i)
            t.set(spec.slot(i).name, toml::Value{theta->values[static_cast<Eigen::Index>(i)]});
    }
    if (fit.n_starts || fit.zero_threshold || fit.lrs_threshold) {
        auto& f = doc.section("fit");
        if (fit.n_starts) f.set("n_starts", toml::Value{static_cast<double>(*fit.n_starts)});
        if (fit.zero_threshold) f.set("zero_threshold", toml::Value{*fit.zero_threshold});
        if (fit.lrs_threshold) f.set("lrs_threshold", toml::Value{*fit.lrs_threshold});
    }
    return toml::serialize(doc);
}

ParamVector parse_inline_theta(const ModelSpec& spec, std::string_view text) {
    std::map<std::string, double> named;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view item = text.substr(pos, end - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string_view::npos) throw InvalidInput("theta item '" + std::string(item) + "' lacks '='");
        const std::string name(item.substr(0, eq));
        const std::string_view num = item.substr(eq + 1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (ec != std::errc() || ptr != num.data() + num.size())
            throw InvalidInput("theta value for '" + name + "' is not a number");
        named[name] = v;
        pos = end + 1;
    }
    return spec.make_params(named);
}

} // namespace hawkes
