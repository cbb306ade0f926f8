#include "beamfactory/grid_io.hpp"

#include <ostream>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"

namespace beamfactory {

void write_grid_matrix(std::ostream& out, const GridSpec& grid,
                       std::span<const std::optional<double>> values, int decimals) {
  if (values.size() != grid.size()) throw InvalidArgument("value count does not match the grid");
  std::string line;
  for (std::size_t j = 0; j < grid.ny(); ++j) {
    line.clear();
    for (std::size_t i = 0; i < grid.nx(); ++i) {
      if (i > 0) line += ',';
      const auto& v = values[grid.flat({i, j})];
      if (v) line += fmt::format("{:.{}f}", *v, decimals);
    }
    line += '\n';
    out << line;
  }
}

std::string grid_sidecar_json(const GridSpec& grid, std::string_view quantity,
                              std::string_view unit) {
  return fmt::format(
      "{{\n  \"quantity\": \"{}\",\n  \"unit\": \"{}\",\n  \"origin_x_m\": {:.3f},\n"
      "  \"origin_y_m\": {:.3f},\n  \"cell_dx_m\": {:.3f},\n  \"cell_dy_m\": {:.3f},\n"
      "  \"nx\": {},\n  \"ny\": {},\n  \"row_order\": \"south_to_north\"\n}}\n",
      quantity, unit, grid.origin().x, grid.origin().y, grid.cell_dx(), grid.cell_dy(), grid.nx(),
      grid.ny());
}

void write_cdf_csv(std::ostream& out, const EmpiricalCdf& cdf, int decimals) {
  out << "value,probability\n";
  for (const auto& [v, p] : cdf.points()) out << fmt::format("{:.{}f},{:.6f}\n", v, decimals, p);
}

}  // namespace beamfactory
