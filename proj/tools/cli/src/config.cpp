#include "mkvcyl_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mkvcyl/errors.hpp"
#include "mkvcyl_cli/csv.hpp"

namespace mkvcyl::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || p != t.data() + t.size() || t.empty())
        throw ConfigError("not a number: '" + text + "'");
    return v;
}

void check_keys(const YAML::Node& node, const std::string& block, const std::set<std::string>& allowed)
{
    if (!node.IsMap()) throw ConfigError("block '" + block + "' must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in block '" + block + "'");
    }
}

template <class T>
T get(const YAML::Node& node, const std::string& key, const std::string& block)
{
    try {
        return node[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("bad value for '" + block + "." + key + "'");
    }
}

double get_double(const YAML::Node& node, const std::string& key, const std::string& block)
{
    if (!node[key].IsScalar()) throw ConfigError("bad value for '" + block + "." + key + "'");
    try {
        return parse_number(node[key].Scalar());
    } catch (const ConfigError&) {
        throw ConfigError("bad value for '" + block + "." + key + "'");
    }
}

std::vector<double> get_list(const YAML::Node& node, const std::string& key, const std::string& block)
{
    const auto n = node[key];
    if (!n.IsSequence()) throw ConfigError("'" + block + "." + key + "' must be a list");
    std::vector<double> out;
    for (const auto& e : n) {
        if (!e.IsScalar()) throw ConfigError("'" + block + "." + key + "' must hold numbers");
        out.push_back(parse_number(e.Scalar()));
    }
    return out;
}

Rule get_rule(const YAML::Node& node, const std::string& key, const std::string& block)
{
    const auto n = node[key];
    try {
        if (n.IsSequence()) return Rule::of_list(get_list(node, key, block));
        if (n.IsScalar()) {
            const auto s = trim(n.Scalar());
            if (!s.empty() && s.find('(') == std::string::npos) return Rule{Rule::Kind::constant, {parse_number(s)}};
            return Rule::parse(s);
        }
    } catch (const ConfigError& e) {
        throw ConfigError("'" + block + "." + key + "': " + e.what());
    }
    throw ConfigError("bad rule for '" + block + "." + key + "'");
}

void emit_num(YAML::Emitter& out, double v) { out << format_double(v); }

void emit_list(YAML::Emitter& out, const std::vector<double>& v)
{
    out << YAML::Flow << YAML::BeginSeq;
    for (double x : v) emit_num(out, x);
    out << YAML::EndSeq;
}

void emit_rule(YAML::Emitter& out, const Rule& r)
{
    if (r.kind == Rule::Kind::list)
        emit_list(out, r.args);
    else
        out << r.str();
}

} // namespace

Rule Rule::parse(const std::string& text)
{
    const std::string s = trim(text);
    const auto open = s.find('(');
    if (open == std::string::npos || s.back() != ')') throw ConfigError("malformed rule '" + text + "'");
    const std::string name = trim(s.substr(0, open));
    std::string inner = trim(s.substr(open + 1, s.size() - open - 2));
    if (!inner.empty() && inner.front() == '[') {
        if (inner.back() != ']') throw ConfigError("malformed rule '" + text + "'");
        inner = inner.substr(1, inner.size() - 2);
    }
    std::vector<double> args;
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) args.push_back(parse_number(item));

    Rule r;
    if (name == "constant") r.kind = Kind::constant;
    else if (name == "geometric") r.kind = Kind::geometric;
    else if (name == "list") r.kind = Kind::list;
    else throw ConfigError("unknown rule '" + name + "'");
    if (r.kind != Kind::list && args.size() != 1) throw ConfigError(name + "() takes one argument");
    if (r.kind == Kind::list && args.empty()) throw ConfigError("list() needs at least one value");
    r.args = std::move(args);
    return r;
}

std::string Rule::str() const
{
    std::string s = kind == Kind::constant ? "constant(" : kind == Kind::geometric ? "geometric(" : "list(";
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) s += ", ";
        s += format_double(args[i]);
    }
    return s + ")";
}

std::vector<double> Rule::resolve(std::size_t K, const char* what) const
{
    switch (kind) {
    case Kind::constant:
        return std::vector<double>(K, args.at(0));
    case Kind::geometric: {
        std::vector<double> v(K);
        for (std::size_t k = 0; k < K; ++k) v[k] = std::pow(args.at(0), static_cast<double>(k + 1));
        return v;
    }
    case Kind::list:
        if (args.size() != K)
            throw ConfigError(std::string(what) + ": list has " + std::to_string(args.size()) + " values, expected " +
                              std::to_string(K));
        return args;
    }
    return {};
}

RunConfig parse_config(const std::string& text)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config must be a mapping");
    check_keys(root, "config", {"spectrum", "lattice", "ensemble", "drift", "command", "output"});

    RunConfig cfg;
    if (const auto n = root["spectrum"]) {
        check_keys(n, "spectrum", {"modes", "hurst", "lambda", "horizon"});
        if (n["modes"]) cfg.spectrum.modes = get<std::size_t>(n, "modes", "spectrum");
        if (n["hurst"]) cfg.spectrum.hurst = get_rule(n, "hurst", "spectrum");
        if (n["lambda"]) cfg.spectrum.lambda = get_rule(n, "lambda", "spectrum");
        if (n["horizon"]) cfg.spectrum.horizon = get_double(n, "horizon", "spectrum");
    }
    if (const auto n = root["lattice"]) {
        check_keys(n, "lattice", {"steps"});
        if (n["steps"]) cfg.lattice.steps = get<std::size_t>(n, "steps", "lattice");
    }
    const auto ens = root["ensemble"];
    if (!ens || !ens["seed"]) throw ConfigError("ensemble.seed is required");
    check_keys(ens, "ensemble", {"particles", "seed", "generator", "x0"});
    cfg.ensemble.seed = get<std::uint64_t>(ens, "seed", "ensemble");
    if (ens["particles"]) cfg.ensemble.particles = get<std::size_t>(ens, "particles", "ensemble");
    if (ens["generator"]) cfg.ensemble.generator = get<std::string>(ens, "generator", "ensemble");
    if (ens["x0"]) cfg.ensemble.x0 = get_rule(ens, "x0", "ensemble");

    if (const auto n = root["drift"]) {
        check_keys(n, "drift", {"family", "bounds", "params"});
        if (n["family"]) cfg.drift.family = get<std::string>(n, "family", "drift");
        if (n["bounds"]) cfg.drift.bounds = get_rule(n, "bounds", "drift");
        const auto& fam = cfg.drift.family;
        std::set<std::string> allowed;
        if (fam == "constant") allowed = {"value"};
        else if (fam == "mean_field_ou") allowed = {"rate"};
        else if (fam == "tanh_mode") allowed = {"gain"};
        else if (fam == "custom_table") allowed = {"x_grid", "m_grid", "rows", "values"};
        else if (fam != "zero") throw ConfigError("unknown drift family '" + fam + "'");
        if (const auto p = n["params"]) {
            check_keys(p, "drift.params", allowed);
            if (p["value"]) cfg.drift.value = get_rule(p, "value", "drift.params");
            if (p["rate"]) cfg.drift.rate = get_double(p, "rate", "drift.params");
            if (p["gain"]) cfg.drift.gain = get_double(p, "gain", "drift.params");
            if (p["x_grid"]) cfg.drift.x_grid = get_list(p, "x_grid", "drift.params");
            if (p["m_grid"]) cfg.drift.m_grid = get_list(p, "m_grid", "drift.params");
            if (p["rows"]) cfg.drift.rows = get<std::size_t>(p, "rows", "drift.params");
            if (p["values"]) cfg.drift.table = get_list(p, "values", "drift.params");
        }
        if (fam == "custom_table" && (cfg.drift.x_grid.empty() || cfg.drift.m_grid.empty() || cfg.drift.table.empty()))
            throw ConfigError("custom_table needs x_grid, m_grid and values");
    }
    if (const auto n = root["command"]) {
        check_keys(n, "command", {"name", "tol", "max_iter", "damping", "metric_cap", "subsample", "probe", "slack",
                                  "mu", "nu", "shift"});
        auto& c = cfg.command;
        if (n["name"]) c.name = get<std::string>(n, "name", "command");
        if (n["tol"]) c.tol = get_double(n, "tol", "command");
        if (n["max_iter"]) c.max_iter = get<std::size_t>(n, "max_iter", "command");
        if (n["damping"]) c.damping = get_double(n, "damping", "command");
        if (n["metric_cap"]) c.metric_cap = get<std::size_t>(n, "metric_cap", "command");
        if (n["subsample"]) c.subsample = get<std::size_t>(n, "subsample", "command");
        if (n["probe"]) c.probe = get<bool>(n, "probe", "command");
        if (n["slack"]) c.slack = get_double(n, "slack", "command");
        if (n["mu"]) c.mu = get<std::string>(n, "mu", "command");
        if (n["nu"]) c.nu = get<std::string>(n, "nu", "command");
        if (n["shift"]) c.shift = get_double(n, "shift", "command");
    }
    if (const auto n = root["output"]) {
        check_keys(n, "output", {"dir", "formats", "timing"});
        if (n["dir"]) cfg.output.dir = get<std::string>(n, "dir", "output");
        if (n["formats"]) cfg.output.formats = get<std::vector<std::string>>(n, "formats", "output");
        if (n["timing"]) cfg.output.timing = get<bool>(n, "timing", "output");
    }

    // validation
    const auto& names = command_names();
    if (!cfg.command.name.empty() && std::find(names.begin(), names.end(), cfg.command.name) == names.end())
        throw ConfigError("unknown command '" + cfg.command.name + "'");
    if (cfg.spectrum.modes == 0) throw ConfigError("spectrum.modes must be >= 1");
    if (!(cfg.spectrum.horizon >= 1.0) || !std::isfinite(cfg.spectrum.horizon))
        throw ConfigError("spectrum.horizon must be finite and >= 1");
    cfg.spectrum.hurst.resolve(cfg.spectrum.modes, "spectrum.hurst");
    cfg.spectrum.lambda.resolve(cfg.spectrum.modes, "spectrum.lambda");
    cfg.drift.bounds.resolve(cfg.spectrum.modes, "drift.bounds");
    cfg.ensemble.x0.resolve(cfg.spectrum.modes, "ensemble.x0");
    if (cfg.drift.family == "constant") cfg.drift.value.resolve(cfg.spectrum.modes, "drift.params.value");
    if (cfg.lattice.steps == 0) throw ConfigError("lattice.steps must be >= 1");
    if (cfg.ensemble.particles == 0) throw ConfigError("ensemble.particles must be >= 1");
    if (cfg.ensemble.generator != "cholesky" && cfg.ensemble.generator != "volterra")
        throw ConfigError("ensemble.generator must be cholesky or volterra");
    if (!(cfg.command.tol > 0.0)) throw ConfigError("command.tol must be > 0");
    if (!(cfg.command.damping > 0.0 && cfg.command.damping <= 1.0))
        throw ConfigError("command.damping must lie in (0, 1]");
    if (cfg.command.max_iter == 0) throw ConfigError("command.max_iter must be >= 1");
    if (cfg.command.metric_cap < 2) throw ConfigError("command.metric_cap must be >= 2");
    if (!(cfg.command.slack >= 0.0)) throw ConfigError("command.slack must be >= 0");
    for (const auto& f : cfg.output.formats)
        if (f != "csv" && f != "binary") throw ConfigError("unknown output format '" + f + "'");
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig cfg = parse_config(ss.str());
    const auto slash = path.find_last_of('/');
    cfg.base_dir = slash == std::string::npos ? "." : path.substr(0, slash);
    return cfg;
}

std::string serialize_config(const RunConfig& cfg)
{
    YAML::Emitter out;
    out << YAML::BeginMap;

    out << YAML::Key << "spectrum" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "modes" << YAML::Value << cfg.spectrum.modes;
    out << YAML::Key << "hurst" << YAML::Value;
    emit_rule(out, cfg.spectrum.hurst);
    out << YAML::Key << "lambda" << YAML::Value;
    emit_rule(out, cfg.spectrum.lambda);
    out << YAML::Key << "horizon" << YAML::Value;
    emit_num(out, cfg.spectrum.horizon);
    out << YAML::EndMap;

    out << YAML::Key << "lattice" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "steps" << YAML::Value << cfg.lattice.steps;
    out << YAML::EndMap;

    out << YAML::Key << "ensemble" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "particles" << YAML::Value << cfg.ensemble.particles;
    out << YAML::Key << "seed" << YAML::Value << cfg.ensemble.seed;
    out << YAML::Key << "generator" << YAML::Value << cfg.ensemble.generator;
    out << YAML::Key << "x0" << YAML::Value;
    emit_rule(out, cfg.ensemble.x0);
    out << YAML::EndMap;

    const auto& d = cfg.drift;
    out << YAML::Key << "drift" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "family" << YAML::Value << d.family;
    out << YAML::Key << "bounds" << YAML::Value;
    emit_rule(out, d.bounds);
    if (d.family != "zero") {
        out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
        if (d.family == "constant") {
            out << YAML::Key << "value" << YAML::Value;
            emit_rule(out, d.value);
        } else if (d.family == "mean_field_ou") {
            out << YAML::Key << "rate" << YAML::Value;
            emit_num(out, d.rate);
        } else if (d.family == "tanh_mode") {
            out << YAML::Key << "gain" << YAML::Value;
            emit_num(out, d.gain);
        } else if (d.family == "custom_table") {
            out << YAML::Key << "x_grid" << YAML::Value;
            emit_list(out, d.x_grid);
            out << YAML::Key << "m_grid" << YAML::Value;
            emit_list(out, d.m_grid);
            out << YAML::Key << "rows" << YAML::Value << d.rows;
            out << YAML::Key << "values" << YAML::Value;
            emit_list(out, d.table);
        }
        out << YAML::EndMap;
    }
    out << YAML::EndMap;

    const auto& c = cfg.command;
    out << YAML::Key << "command" << YAML::Value << YAML::BeginMap;
    if (!c.name.empty()) out << YAML::Key << "name" << YAML::Value << c.name;
    out << YAML::Key << "tol" << YAML::Value;
    emit_num(out, c.tol);
    out << YAML::Key << "max_iter" << YAML::Value << c.max_iter;
    out << YAML::Key << "damping" << YAML::Value;
    emit_num(out, c.damping);
    out << YAML::Key << "metric_cap" << YAML::Value << c.metric_cap;
    out << YAML::Key << "subsample" << YAML::Value << c.subsample;
    out << YAML::Key << "probe" << YAML::Value << c.probe;
    out << YAML::Key << "slack" << YAML::Value;
    emit_num(out, c.slack);
    if (!c.mu.empty()) out << YAML::Key << "mu" << YAML::Value << YAML::DoubleQuoted << c.mu;
    if (!c.nu.empty()) out << YAML::Key << "nu" << YAML::Value << YAML::DoubleQuoted << c.nu;
    out << YAML::Key << "shift" << YAML::Value;
    emit_num(out, c.shift);
    out << YAML::EndMap;

    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << YAML::DoubleQuoted << cfg.output.dir;
    out << YAML::Key << "formats" << YAML::Value << YAML::Flow << cfg.output.formats;
    out << YAML::Key << "timing" << YAML::Value << cfg.output.timing;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace mkvcyl::cli
