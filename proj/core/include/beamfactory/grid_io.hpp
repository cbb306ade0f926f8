#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "beamfactory/analysis.hpp"

namespace beamfactory {

// Matrix CSV: ny lines of nx comma-separated values, line k holding grid row
// j = k (southernmost first). Empty cells are written as empty fields.
void write_grid_matrix(std::ostream& out, const GridSpec& grid,
                       std::span<const std::optional<double>> values, int decimals = 2);

// JSON sidecar describing the matrix: origin, cell size, counts and quantity.
std::string grid_sidecar_json(const GridSpec& grid, std::string_view quantity,
                              std::string_view unit);

// Two-column CSV "value,probability".
void write_cdf_csv(std::ostream& out, const EmpiricalCdf& cdf, int decimals = 2);

}  // namespace beamfactory
