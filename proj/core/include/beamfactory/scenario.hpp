#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beamfactory/analysis.hpp"
#include "beamfactory/beams.hpp"
#include "beamfactory/layout.hpp"
#include "beamfactory/link.hpp"
#include "beamfactory/propagation.hpp"
#include "beamfactory/shadowing.hpp"

namespace beamfactory {

struct ShadowingSettings {
  bool enabled = true;
  double decorrelation_m = 10.0;
  double spacing_m = 0.5;
};

struct AnalysisSettings {
  double cell_dx = 1.0;  // m
  double cell_dy = 1.0;
  double threshold_dbm = -100.0;
  std::vector<DistanceBin> distance_bins;  // empty -> 5 m bins over the layout
};

// Everything a campaign needs, as read from a scenario file.
struct Scenario {
  std::string name;
  FactoryLayout layout;
  BeamGridConfig beams;
  PathGainModel model_los;
  PathGainModel model_nlos;
  std::string model_name;  // "<los>/<nlos>"
  LinkBudget budget;
  SsbTiming timing;
  ShadowingSettings shadowing;
  double fading_sigma_db = 0.0;
  std::vector<RouteSpec> routes;
  AnalysisSettings analysis;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::optional<std::string> output_dir;

  // Unit shadowing lattice over the layout bounds for `seed`.
  ShadowingField shadowing_field(std::uint64_t seed) const;
  GridSpec analysis_grid() const;
  GridSpec analysis_grid(double cell_dx, double cell_dy) const;
  std::vector<DistanceBin> distance_bins() const;
};

// Throws ConfigError with the offending field path and line number.
Scenario parse_scenario(std::string_view yaml_text);
Scenario load_scenario(const std::filesystem::path& path);

// Runs the scenario's routes with the given seed (scenario.seed when unset).
MeasurementTrace simulate(const Scenario& scenario, std::optional<std::uint64_t> seed = {},
                          std::optional<unsigned> workers = {});

// Boustrophedon sweep of r: passes `spacing` apart along `axis` ('x' or 'y'),
// first pass at spacing / 2 from the edge.
std::vector<Point2> lawnmower_waypoints(const Rect& r, double spacing, char axis);

}  // namespace beamfactory
