#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mkvcyl::cli {

// Per-mode value generator: constant(c), geometric(q) -> q^k for k = 1..K,
// list(a, b, ...).
struct Rule {
    enum class Kind { constant, geometric, list };
    Kind kind = Kind::constant;
    std::vector<double> args;

    std::vector<double> resolve(std::size_t K, const char* what) const;
    std::string str() const;

    static Rule parse(const std::string& text);
    static Rule of_list(std::vector<double> values) { return Rule{Kind::list, std::move(values)}; }

    bool operator==(const Rule&) const = default;
};

struct SpectrumBlock {
    std::size_t modes = 1;
    Rule hurst{Rule::Kind::constant, {0.5}};
    Rule lambda{Rule::Kind::constant, {1.0}};
    double horizon = 1.0;

    bool operator==(const SpectrumBlock&) const = default;
};

struct LatticeBlock {
    std::size_t steps = 32;

    bool operator==(const LatticeBlock&) const = default;
};

struct EnsembleBlock {
    std::size_t particles = 1000;
    std::uint64_t seed = 0;
    std::string generator = "cholesky";  // or volterra
    Rule x0{Rule::Kind::constant, {0.0}};

    bool operator==(const EnsembleBlock&) const = default;
};

struct DriftBlock {
    std::string family = "zero";
    Rule bounds{Rule::Kind::constant, {1.0}};
    // family parameters; only those of the chosen family are read or written
    double rate = 1.0;                         // mean_field_ou
    double gain = 1.0;                         // tanh_mode
    Rule value{Rule::Kind::constant, {0.0}};   // constant
    std::vector<double> x_grid, m_grid;        // custom_table
    std::size_t rows = 1;
    std::vector<double> table;

    bool operator==(const DriftBlock&) const = default;
};

struct CommandBlock {
    std::string name;
    double tol = 0.02;
    std::size_t max_iter = 20;
    double damping = 1.0;
    std::size_t metric_cap = 2000;
    std::size_t subsample = 0;
    bool probe = false;
    double slack = 0.1;
    std::string mu;  // metric inputs (measure CSV); empty: generated
    std::string nu;
    double shift = 0.5;

    bool operator==(const CommandBlock&) const = default;
};

struct OutputBlock {
    std::string dir = "out";
    std::vector<std::string> formats{"csv"};  // csv, binary
    bool timing = false;

    bool operator==(const OutputBlock&) const = default;
};

struct RunConfig {
    SpectrumBlock spectrum;
    LatticeBlock lattice;
    EnsembleBlock ensemble;
    DriftBlock drift;
    CommandBlock command;
    OutputBlock output;
    std::string base_dir;  // directory of the config file, for relative inputs; not serialized

    bool operator==(const RunConfig& o) const
    {
        return spectrum == o.spectrum && lattice == o.lattice && ensemble == o.ensemble && drift == o.drift &&
               command == o.command && output == o.output;
    }
};

inline const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"simulate", "fixpoint", "girsanov-check", "metric", "fbm-test"};
    return names;
}

// ConfigError on syntax errors, unknown keys, missing seed or bad values.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

} // namespace mkvcyl::cli
