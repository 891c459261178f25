#include "fvsim/config.hpp"

#include "fvsim/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace fvsim {

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
    if (!obj.is_object()) throw ConfigParseError(std::string(where) + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.contains(key))
            throw ConfigParseError("unknown key '" + key + "' in " + where);
}

template <typename T> T get(const json& obj, const char* key, const char* where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string(where) + "." + key + ": " + e.what());
    }
}

template <typename T> T get_or(const json& obj, const char* key, T fallback, const char* where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return get<T>(obj, key, where);
}

std::pair<double, double> parse_pair(const json& v, const char* where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigParseError(std::string(where) + " must be a [x, y] pair of numbers");
    return {v[0].get<double>(), v[1].get<double>()};
}

FunctionSpec parse_function(const json& v, const char* where) {
    FunctionSpec f;
    if (v.is_string()) {
        f.name = v.get<std::string>();
        if (f.name != "one" && f.name.rfind("indicator:", 0) != 0)
            throw ConfigParseError(std::string(where) + ": unknown function '" + f.name + "'");
    } else if (v.is_array()) {
        f.name = "table";
        try {
            f.table = v.get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ConfigParseError(std::string(where) + ": " + e.what());
        }
    } else {
        throw ConfigParseError(std::string(where) + " must be a name or a value table");
    }
    return f;
}

json function_to_json(const FunctionSpec& f) {
    if (f.name == "table") return f.table;
    return f.name;
}

std::vector<std::pair<double, double>> read_starts_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("cannot open starts file " + path.string());
    std::vector<std::pair<double, double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        if (lineno == 1 && line.find_first_of("xyXY") != std::string::npos) continue; // header
        double x = 0.0, y = 0.0;
        char comma = 0;
        std::istringstream row(line);
        if (!(row >> x >> comma >> y) || comma != ',')
            throw ConfigParseError(path.string() + ":" + std::to_string(lineno) + ": expected 'x,y'");
        rows.emplace_back(x, y);
    }
    return rows;
}

} // namespace

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
    case ExperimentKind::Oracle: return "oracle";
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Verify: return "verify";
    case ExperimentKind::Extinction: return "extinction";
    }
    return "?";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
    if (name == "oracle") return ExperimentKind::Oracle;
    if (name == "simulate") return ExperimentKind::Simulate;
    if (name == "verify") return ExperimentKind::Verify;
    if (name == "extinction") return ExperimentKind::Extinction;
    throw ConfigParseError("unknown experiment '" + std::string(name) + "'");
}

ModelSpec parse_model_spec(const json& doc) {
    constexpr const char* where = "model";
    if (!doc.is_object()) throw ConfigParseError("model must be an object");
    ModelSpec m;
    m.kind = get<std::string>(doc, "kind", where);
    if (m.kind == "finite_chain") {
        check_keys(doc, {"kind", "states", "jump_rates", "kill_rates", "ref_measure"}, where);
        m.states = get<std::size_t>(doc, "states", where);
        m.jump_rates = get<std::vector<double>>(doc, "jump_rates", where);
        m.kill_rates = get<std::vector<double>>(doc, "kill_rates", where);
        m.ref_measure = get_or<std::vector<double>>(doc, "ref_measure",
                                                    std::vector<double>(m.states, 1.0), where);
        return m;
    }
    m.dt = get_or<double>(doc, "dt", m.dt, where);
    m.bridge_correction = get_or<bool>(doc, "bridge_correction", m.bridge_correction, where);
    m.path_stride = get_or<std::size_t>(doc, "path_stride", m.path_stride, where);
    if (m.kind == "brownian_interval") {
        check_keys(doc, {"kind", "domain", "dt", "bridge_correction", "path_stride"}, where);
        std::tie(m.lo, m.hi) = parse_pair(doc.at("domain"), "model.domain");
    } else if (m.kind == "bessel") {
        check_keys(doc, {"kind", "domain", "nu", "dt", "bridge_correction", "kill_epsilon",
                         "step_scale", "path_stride"},
                   where);
        m.nu = get<double>(doc, "nu", where);
        m.kill_epsilon = get_or<double>(doc, "kill_epsilon", m.kill_epsilon, where);
        m.step_scale = get_or<double>(doc, "step_scale", m.step_scale, where);
        m.lo = 0.0;
        m.hi = kInfinity;
        if (doc.contains("domain")) {
            const auto& d = doc.at("domain");
            if (!d.is_array() || d.size() != 2 || d[0] != 0 || !d[1].is_null())
                throw ConfigParseError("bessel domain is fixed to [0, null]");
        }
    } else if (m.kind == "uniform_left") {
        check_keys(doc, {"kind", "domain", "dt", "bridge_correction", "path_stride"}, where);
        std::tie(m.lo, m.hi) = parse_pair(doc.at("domain"), "model.domain");
        m.bridge_correction = false;
    } else {
        throw ConfigParseError("unknown model kind '" + m.kind + "'");
    }
    return m;
}

json to_json(const ModelSpec& m) {
    json j;
    j["kind"] = m.kind;
    if (m.kind == "finite_chain") {
        j["states"] = m.states;
        j["jump_rates"] = m.jump_rates;
        j["kill_rates"] = m.kill_rates;
        j["ref_measure"] = m.ref_measure;
        return j;
    }
    if (m.kind == "bessel") {
        j["domain"] = json::array({0, nullptr});
        j["nu"] = m.nu;
        j["kill_epsilon"] = m.kill_epsilon;
        j["step_scale"] = m.step_scale;
    } else {
        j["domain"] = json::array({m.lo, m.hi});
    }
    j["dt"] = m.dt;
    j["bridge_correction"] = m.bridge_correction;
    j["path_stride"] = m.path_stride;
    return j;
}

AnyModel build_model(const ModelSpec& spec) {
    if (spec.kind == "finite_chain") {
        const auto n = spec.states;
        if (n == 0) throw ModelValidationError("states must be >= 1");
        if (spec.jump_rates.size() != n * n)
            throw ModelValidationError("jump_rates must hold states^2 entries (row-major)");
        if (spec.kill_rates.size() != n || spec.ref_measure.size() != n)
            throw ModelValidationError("kill_rates and ref_measure must hold one entry per state");
        const auto sn = static_cast<Eigen::Index>(n);
        Eigen::MatrixXd q(sn, sn);
        for (Eigen::Index i = 0; i < sn; ++i)
            for (Eigen::Index j = 0; j < sn; ++j)
                q(i, j) = spec.jump_rates[static_cast<std::size_t>(i * sn + j)];
        Eigen::VectorXd k = Eigen::Map<const Eigen::VectorXd>(spec.kill_rates.data(), sn);
        Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(spec.ref_measure.data(), sn);
        return build_finite_chain(std::move(q), std::move(k), std::move(m));
    }
    DiffusionModel d;
    d.kind = diffusion_kind_from_string(spec.kind);
    d.lo = spec.lo;
    d.hi = spec.hi;
    d.nu = spec.nu;
    d.dt = spec.dt;
    d.bridge_correction = spec.bridge_correction;
    d.kill_epsilon = spec.kill_epsilon;
    d.step_scale = spec.step_scale;
    d.path_stride = spec.path_stride;
    validate(d);
    return d;
}

TestFunction resolve_function(const FunctionSpec& spec, std::size_t n) {
    if (spec.name == "one") return TestFunction::one();
    if (spec.name == "table") {
        if (spec.table.size() != n)
            throw ConfigParseError("function table must hold one value per state");
        return TestFunction::table(spec.table);
    }
    if (spec.name.rfind("indicator:", 0) == 0) {
        const std::string arg = spec.name.substr(10);
        std::size_t pos = 0;
        unsigned long state = 0;
        try {
            state = std::stoul(arg, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != arg.size())
            throw ConfigParseError("bad indicator state in '" + spec.name + "'");
        if (state >= n) throw ConfigParseError("indicator state out of range: " + spec.name);
        return TestFunction::indicator(state, n);
    }
    throw ConfigParseError("unknown function '" + spec.name + "'");
}

ExperimentConfig parse_config(const json& doc) {
    check_keys(doc, {"schema_version", "experiment", "model", "params", "master_seed", "threads"},
               "config");
    if (doc.contains("schema_version") && doc.at("schema_version") != kConfigSchemaVersion)
        throw ConfigParseError("unsupported schema_version");
    ExperimentConfig c;
    c.experiment = experiment_kind_from_string(get<std::string>(doc, "experiment", "config"));
    if (!doc.contains("master_seed")) throw ConfigParseError("config.master_seed is required");
    c.master_seed = get<std::uint64_t>(doc, "master_seed", "config");
    if (doc.contains("threads")) {
        const auto& t = doc.at("threads");
        if (t.is_string() && t == "auto") {
            c.threads.reset();
        } else if (t.is_number_unsigned() && t.get<unsigned>() >= 1) {
            c.threads = t.get<unsigned>();
        } else {
            throw ConfigParseError("config.threads must be \"auto\" or a positive integer");
        }
    }
    if (!doc.contains("model")) throw ConfigParseError("config.model is required");
    c.model = parse_model_spec(doc.at("model"));

    const json params = doc.value("params", json::object());
    constexpr const char* where = "params";
    check_keys(params,
               {"lambdas", "f", "g", "replicates", "initial", "starts", "stop",
                "dump_trajectories", "occupation_tolerance", "min_extinct_fraction",
                "max_extinct_fraction"},
               where);
    auto& p = c.params;
    p.lambdas = get_or<std::vector<double>>(params, "lambdas", p.lambdas, where);
    for (double l : p.lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigParseError("lambdas must be finite and >= 0");
    if (params.contains("f")) p.f = parse_function(params.at("f"), "params.f");
    if (params.contains("g")) p.g = parse_function(params.at("g"), "params.g");
    p.replicates = get_or<std::size_t>(params, "replicates", p.replicates, where);
    if (p.replicates < 1) throw ConfigParseError("params.replicates must be >= 1");

    if (params.contains("initial")) {
        const auto& v = params.at("initial");
        if (v.is_string() && (v == "delta" || v == "product")) {
            p.initial.kind = v.get<std::string>();
        } else if (v.is_object() && v.size() == 1 && v.contains("point")) {
            p.initial.kind = "point";
            std::tie(p.initial.x, p.initial.y) = parse_pair(v.at("point"), "params.initial.point");
        } else {
            throw ConfigParseError("params.initial must be \"delta\", \"product\" or {\"point\": [x, y]}");
        }
    }
    if (params.contains("starts")) {
        const auto& rows = params.at("starts");
        if (!rows.is_array()) throw ConfigParseError("params.starts must be an array of pairs");
        for (const auto& r : rows) p.starts.push_back(parse_pair(r, "params.starts[]"));
    }
    if (params.contains("stop")) {
        const auto& s = params.at("stop");
        check_keys(s, {"max_branches", "time_horizon", "extinction_epsilon", "extinction_window"},
                   "params.stop");
        p.stop.max_branches = get_or<std::size_t>(s, "max_branches", p.stop.max_branches, "stop");
        if (s.contains("time_horizon") && !s.at("time_horizon").is_null())
            p.stop.time_horizon = get<double>(s, "time_horizon", "stop");
        p.stop.extinction_epsilon =
            get_or<double>(s, "extinction_epsilon", p.stop.extinction_epsilon, "stop");
        p.stop.extinction_window =
            get_or<std::size_t>(s, "extinction_window", p.stop.extinction_window, "stop");
        try {
            p.stop.validate();
        } catch (const Error& e) {
            throw ConfigParseError(std::string("params.stop: ") + e.what());
        }
    }
    p.dump_trajectories = get_or<bool>(params, "dump_trajectories", p.dump_trajectories, where);
    p.occupation_tolerance =
        get_or<double>(params, "occupation_tolerance", p.occupation_tolerance, where);
    if (params.contains("min_extinct_fraction"))
        p.min_extinct_fraction = get<double>(params, "min_extinct_fraction", where);
    if (params.contains("max_extinct_fraction"))
        p.max_extinct_fraction = get<double>(params, "max_extinct_fraction", where);
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigParseError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigParseError(path.string() + ": " + e.what());
    }
    std::vector<std::pair<double, double>> file_starts;
    if (doc.contains("params") && doc["params"].is_object() && doc["params"].contains("starts_file")) {
        const auto rel = doc["params"]["starts_file"].get<std::string>();
        file_starts = read_starts_csv(path.parent_path() / rel);
        doc["params"].erase("starts_file");
    }
    ExperimentConfig c = parse_config(doc);
    c.params.starts.insert(c.params.starts.end(), file_starts.begin(), file_starts.end());
    return c;
}

json to_json(const ExperimentConfig& c) {
    json doc;
    doc["schema_version"] = kConfigSchemaVersion;
    doc["experiment"] = to_string(c.experiment);
    doc["master_seed"] = c.master_seed;
    if (c.threads)
        doc["threads"] = *c.threads;
    else
        doc["threads"] = "auto";
    doc["model"] = to_json(c.model);

    const auto& p = c.params;
    json params;
    params["lambdas"] = p.lambdas;
    params["f"] = function_to_json(p.f);
    params["g"] = function_to_json(p.g);
    params["replicates"] = p.replicates;
    if (p.initial.kind == "point")
        params["initial"] = {{"point", {p.initial.x, p.initial.y}}};
    else
        params["initial"] = p.initial.kind;
    if (!p.starts.empty()) {
        json rows = json::array();
        for (const auto& [x, y] : p.starts) rows.push_back({x, y});
        params["starts"] = rows;
    }
    json stop;
    stop["max_branches"] = p.stop.max_branches;
    stop["time_horizon"] = p.stop.time_horizon ? json(*p.stop.time_horizon) : json(nullptr);
    stop["extinction_epsilon"] = p.stop.extinction_epsilon;
    stop["extinction_window"] = p.stop.extinction_window;
    params["stop"] = stop;
    params["dump_trajectories"] = p.dump_trajectories;
    params["occupation_tolerance"] = p.occupation_tolerance;
    if (p.min_extinct_fraction) params["min_extinct_fraction"] = *p.min_extinct_fraction;
    if (p.max_extinct_fraction) params["max_extinct_fraction"] = *p.max_extinct_fraction;
    doc["params"] = params;
    return doc;
}

std::string content_hash(const json& doc) {
    const std::string text = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string config_hash(const ExperimentConfig& config) {
    json doc = to_json(config);
    doc.erase("threads");
    return content_hash(doc);
}

} // namespace fvsim
