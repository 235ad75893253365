#include "mkvcyl_cli/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "mkvcyl/errors.hpp"

namespace mkvcyl::cli {

void Table::add_row(const std::vector<double>& row)
{
    if (row.size() != names.size()) throw DomainError("row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) columns[c].push_back(row[c]);
}

std::string format_double(double v)
{
    if (std::isnan(v)) return {};
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace {

std::string quote(const std::string& s)
{
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double field_value(const std::string& s)
{
    if (s.empty()) return std::nan("");
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw ConfigError("bad number '" + s + "' in measure CSV");
    return v;
}

} // namespace

std::string format_csv(const Table& t)
{
    const std::size_t n = t.rows();
    if (t.columns.size() != t.names.size()) throw DomainError("column count does not match the header");
    for (const auto& c : t.columns)
        if (c.size() != n) throw DomainError("table is not rectangular");
    std::string out;
    for (std::size_t c = 0; c < t.names.size(); ++c) {
        if (c) out += ',';
        out += quote(t.names[c]);
    }
    out += '\n';
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (c) out += ',';
            out += format_double(t.columns[c][r]);
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const Table& table, const std::string& path)
{
    const auto text = format_csv(table);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

Table measure_table(const EmpiricalMeasure& m, double t)
{
    std::vector<std::string> names{"t", "particle_id"};
    for (std::size_t k = 0; k < m.dim(); ++k) names.push_back("x_" + std::to_string(k + 1));
    names.push_back("mass");
    Table tab(names);
    std::vector<double> row(names.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        row[0] = t;
        row[1] = static_cast<double>(i);
        for (std::size_t k = 0; k < m.dim(); ++k) row[2 + k] = m.point(i)[k];
        row.back() = m.mass(i);
        tab.add_row(row);
    }
    return tab;
}

Table flow_table(const EmpiricalFlow& flow)
{
    Table out;
    for (std::size_t i = 0; i < flow.measures.size(); ++i) {
        Table part = measure_table(flow.measures[i], flow.lattice.t(i));
        if (out.names.empty()) {
            out = std::move(part);
            continue;
        }
        for (std::size_t c = 0; c < out.columns.size(); ++c)
            out.columns[c].insert(out.columns[c].end(), part.columns[c].begin(), part.columns[c].end());
    }
    return out;
}

MeasureFile read_measure_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open measure file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty measure file '" + path + "'");
    const auto header = split_csv_line(line);
    int t_col = -1, mass_col = -1;
    std::vector<std::size_t> x_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& h = header[c];
        if (h == "t") t_col = static_cast<int>(c);
        else if (h == "mass") mass_col = static_cast<int>(c);
        else if (h.rfind("x_", 0) == 0) x_cols.push_back(c);
        else if (h != "particle_id") throw ConfigError("unexpected column '" + h + "' in " + path);
    }
    if (x_cols.empty()) throw ConfigError("no x_ columns in " + path);

    struct Group {
        std::vector<double> pts, mass;
    };
    std::map<double, Group> groups;  // NaN keys are mapped to one slot below
    Group untimed;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size()) throw ConfigError("ragged row in " + path);
        const double t = t_col >= 0 ? field_value(f[t_col]) : std::nan("");
        Group& g = std::isnan(t) ? untimed : groups[t];
        for (auto c : x_cols) g.pts.push_back(field_value(f[c]));
        g.mass.push_back(mass_col >= 0 ? field_value(f[mass_col]) : 1.0);
    }
    const std::size_t K = x_cols.size();
    auto build = [&](Group& g) {
        const std::size_t n = g.mass.size();
        double s = 0.0;
        for (double m : g.mass) s += m;
        if (mass_col < 0) {
            for (double& m : g.mass) m = 1.0 / static_cast<double>(n);
        } else {
            if (std::abs(s - 1.0) > 1e-9) throw ConfigError("masses in " + path + " do not sum to 1");
            for (double& m : g.mass) m /= s;
        }
        return EmpiricalMeasure(K, std::move(g.pts), std::move(g.mass));
    };
    MeasureFile out;
    if (!untimed.mass.empty()) {
        if (!groups.empty()) throw ConfigError("mixed timed and untimed rows in " + path);
        out.times.push_back(std::nan(""));
        out.measures.push_back(build(untimed));
    }
    for (auto& [t, g] : groups) {
        out.times.push_back(t);
        out.measures.push_back(build(g));
    }
    if (out.measures.empty()) throw ConfigError("no rows in " + path);
    return out;
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

} // namespace mkvcyl::cli
