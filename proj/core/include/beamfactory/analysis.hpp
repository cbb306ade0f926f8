#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "beamfactory/layout.hpp"
#include "beamfactory/link.hpp"

namespace beamfactory {

// Sorted sample with linear-interpolation percentiles.
class EmpiricalCdf {
 public:
  EmpiricalCdf() = default;
  explicit EmpiricalCdf(std::vector<double> values);

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  // Fraction of samples strictly below x.
  double probability_below(double x) const;
  // Linear interpolation between order statistics at h = (n - 1) p.
  double quantile(double p) const;
  // (value, probability) pairs for export: probability = (k + 1) / n.
  std::vector<std::pair<double, double>> points() const;

 private:
  std::vector<double> values_;
};

enum class AveragingDomain { dB, mW };

// Per-cell average of the per-burst strongest RSRP. Unvisited cells are empty
// (nullopt), never zero.
struct GridStat {
  GridSpec grid;
  std::vector<std::optional<double>> mean;  // dBm, flat index
  std::vector<std::size_t> count;

  std::optional<double> at(GridIndex g) const { return mean[grid.flat(g)]; }
  std::size_t populated() const;
};

// Throws InvalidArgument on an empty trace and OutOfGridError if a sample
// falls outside the grid.
GridStat local_average(const MeasurementTrace& trace, const GridSpec& grid,
                       AveragingDomain domain = AveragingDomain::dB);

// gamma = a - b on cells populated in both inputs.
struct ComparisonMap {
  GridSpec grid;
  std::vector<std::optional<double>> gamma;

  std::optional<double> at(GridIndex g) const { return gamma[grid.flat(g)]; }
};

// Throws InvalidArgument when the grids differ.
ComparisonMap gamma_map(const GridStat& a, const GridStat& b);

struct DistanceBin {
  double d_lo = 0.0;  // inclusive, m
  double d_hi = 0.0;  // exclusive, m
};

struct CoverageBin {
  DistanceBin bin;
  std::size_t count = 0;
  std::optional<double> probability;  // P(strongest RSRP < threshold | bin); nullopt when empty
  EmpiricalCdf cdf;                   // strongest RSRP distribution in the bin
};

// Bins use the 3D transmitter-receiver range. Throws InvalidArgument when bins
// overlap or are inverted.
std::vector<CoverageBin> coverage_probability(const MeasurementTrace& trace, double threshold_dbm,
                                              std::span<const DistanceBin> bins,
                                              const FactoryLayout& layout);

// Beam-recovery gaps: delta_i = RSRP(1st) - RSRP(i-th) per burst.
struct BeamDeltaStats {
  int max_i = 2;
  // per_burst[b][i - 2] for the orders that burst reports (fewer beams -> shorter).
  std::vector<std::vector<double>> per_burst;
  // by_order[i - 2] pools delta_i over all bursts that have an i-th beam.
  std::vector<EmpiricalCdf> by_order;

  const EmpiricalCdf& order(int i) const { return by_order.at(static_cast<std::size_t>(i - 2)); }
  // Value x with P(delta_i < x) = p.
  double percentile(int i, double p) const { return order(i).quantile(p); }
};

// Throws InvalidArgument for max_i < 2 or when no burst has two beams.
BeamDeltaStats delta_stats(const MeasurementTrace& trace, int max_i);

struct SmoothedRoute {
  double window_m = 0.0;
  bool degenerate = false;        // window longer than the route
  std::vector<double> traveled;   // m, per input sample
  std::vector<double> azimuth;    // deg, per input sample
  std::vector<SsbId> beams;       // beams present anywhere in the slice
  // rsrp[b][k]: moving average of beam b around sample k; nullopt when the
  // beam has no detection inside the window.
  std::vector<std::vector<std::optional<double>>> rsrp;
};

// Centered moving average over a window of window_wavelengths * lambda along
// traveled distance (40 wavelengths by default). Samples must be in route order.
SmoothedRoute route_smoothing(std::span<const MeasurementSample> samples,
                              const FactoryLayout& layout, double carrier_freq,
                              double window_wavelengths = 40.0);

struct DominanceMap {
  GridSpec grid;
  std::vector<std::optional<double>> fraction;  // in [0, 1]; nullopt when unvisited
  std::vector<std::size_t> count;

  std::optional<double> at(GridIndex g) const { return fraction[grid.flat(g)]; }
};

// Fraction of bursts per cell whose strongest beam (ties to the lowest
// (row, col)) belongs to `subset`. Throws InvalidArgument for an empty subset
// or a beam outside the trace's configuration.
DominanceMap dominance_map(const MeasurementTrace& trace, std::span<const SsbId> subset,
                           const GridSpec& grid);

}  // namespace beamfactory
