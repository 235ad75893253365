#pragma once

#include <string>
#include <vector>

#include "mkvcyl/measure.hpp"

namespace mkvcyl::cli {

// Named numeric columns of equal length.
struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    Table() = default;
    explicit Table(std::vector<std::string> n) : names(std::move(n)), columns(names.size()) {}

    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
    void add_row(const std::vector<double>& row);
};

// Shortest decimal that reads back to the same double.
std::string format_double(double v);

// Header row plus one line per row, '\n' terminated; NaN becomes an empty
// field. Names with ',', '"' or newlines are quoted. DomainError if the
// columns differ in length.
std::string format_csv(const Table& table);

void emit_csv(const Table& table, const std::string& path);

// Columns t, particle_id, x_1..x_K, mass.
Table flow_table(const EmpiricalFlow& flow);
Table measure_table(const EmpiricalMeasure& m, double t);

// Reads a measure CSV. Rows are grouped by t; without a t column everything is
// one measure at t = NaN. Masses are renormalised when they sum to 1 within
// 1e-9; a missing mass column means equal masses.
struct MeasureFile {
    std::vector<double> times;
    std::vector<EmpiricalMeasure> measures;
};
MeasureFile read_measure_csv(const std::string& path);

std::string sha256_hex(const std::string& bytes);

} // namespace mkvcyl::cli
