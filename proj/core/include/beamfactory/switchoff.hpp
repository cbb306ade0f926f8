#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beamfactory/errors.hpp"
#include "beamfactory/layout.hpp"
#include "beamfactory/link.hpp"

namespace beamfactory {

// On/off state of every beam of a configuration. Bit k is beam k in
// make_config() order. Rendered as a '0'/'1' string, beam 0 first.
class BeamMask {
 public:
  static constexpr std::size_t kMaxBeams = 64;

  BeamMask() = default;
  explicit BeamMask(std::size_t size, std::uint64_t bits = 0);
  static BeamMask all_on(std::size_t size);
  static BeamMask parse(std::string_view bits);

  std::size_t size() const { return size_; }
  std::uint64_t bits() const { return bits_; }
  bool test(std::size_t k) const { return (bits_ >> k) & 1U; }
  void set(std::size_t k, bool on = true);
  std::size_t popcount() const;
  std::vector<std::size_t> enabled() const;
  std::string to_string() const;

  // Lexicographic order of to_string() (beam 0 is the most significant char).
  friend bool lexicographically_less(const BeamMask& a, const BeamMask& b);
  friend bool operator==(const BeamMask&, const BeamMask&) = default;

 private:
  std::size_t size_ = 0;
  std::uint64_t bits_ = 0;
};

inline constexpr double kDefaultSwitchOffFloorDbm = -120.0;

// Beam switch-off instance built from a measurement trace:
//   f(set) = 1/N sum_cells (RSRP_max - RSRP_set)   subject to  #set <= xi
// RSRP_set of a cell is the mean over its bursts of the strongest enabled
// beam; a burst with no enabled detection counts at the floor.
class SwitchOffProblem {
 public:
  struct BurstPoint {
    Point2 position;
    std::size_t cell = 0;       // index into cells()
    std::size_t strongest = 0;  // beam index with every beam on
    double rsrp = 0.0;          // strongest RSRP, dBm
  };

  const GridSpec& grid() const { return grid_; }
  TxConfig config() const { return config_; }
  const std::vector<SsbId>& beams() const { return beams_; }
  std::size_t n_beams() const { return beams_.size(); }
  // Populated cells (flat grid indices); N = cells().size().
  const std::vector<std::size_t>& cells() const { return cells_; }
  std::size_t n_cells() const { return cells_.size(); }
  std::size_t xi() const { return xi_; }
  double floor_dbm() const { return floor_; }
  const std::vector<double>& rsrp_max() const { return rsrp_max_; }
  // dB mean of beam b's detections in cell c; nullopt when never detected.
  std::optional<double> beam_mean(std::size_t cell, std::size_t beam) const {
    return beam_mean_[cell * beams_.size() + beam];
  }
  const std::vector<BurstPoint>& bursts() const { return bursts_; }

  // Objective core shared by build and evaluation: per cell, the mean over
  // its bursts of the strongest enabled beam.
  std::vector<double> cell_mean_strongest(const std::vector<std::size_t>& enabled) const;

  // Copy with a different cardinality bound. Throws InvalidArgument if xi < 1.
  SwitchOffProblem with_xi(std::size_t xi) const;

  // Per-cell, per-beam mean table as CSV (cell_i,cell_j,beam,mean_rsrp_dbm,rsrp_max_dbm).
  void write_table_csv(std::ostream& out) const;

 private:
  friend SwitchOffProblem build_problem(const MeasurementTrace&, const GridSpec&, std::size_t,
                                        double);
  SwitchOffProblem() = default;

  GridSpec grid_{{0.0, 0.0}, 1.0, 1.0, 1, 1};
  TxConfig config_ = TxConfig::B;
  std::vector<SsbId> beams_;
  std::vector<std::size_t> cells_;
  std::size_t xi_ = 1;
  double floor_ = kDefaultSwitchOffFloorDbm;
  std::vector<double> rsrp_max_;
  std::vector<std::optional<double>> beam_mean_;  // cells x beams
  std::vector<BurstPoint> bursts_;
  // Beam-major: burst_rsrp_[beam * bursts + burst], floor where undetected.
  // Bursts are grouped by cell with cell_offset_[c]..cell_offset_[c + 1].
  std::vector<double> burst_rsrp_;
  std::vector<std::size_t> cell_offset_;
};

// Throws InvalidArgument if xi < 1 or the trace populates no cell. Samples
// outside the grid are ignored.
SwitchOffProblem build_problem(const MeasurementTrace& trace, const GridSpec& grid, std::size_t xi,
                               double floor_dbm = kDefaultSwitchOffFloorDbm);

// Mean RSRP degradation in dB (>= 0; exactly 0 for the all-on mask). Throws
// InvalidArgument for a wrong-length or all-off mask.
double objective(const SwitchOffProblem& problem, const BeamMask& mask);

struct SolverResult {
  BeamMask mask;
  double objective = 0.0;
  std::size_t evaluations = 0;  // distinct objective evaluations
  std::string solver;
  std::uint64_t seed = 0;
  bool fallback = false;  // DBSCAN found no core point and ranked raw counts
};

class SearchTooLarge : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

inline constexpr std::uint64_t kExhaustiveGuard = 1'000'000;

// Number of masks with 1..xi beams on out of n.
std::uint64_t feasible_mask_count(std::size_t n, std::size_t xi);

// Global minimizer over every mask with 1 <= popcount <= xi; equal objectives
// resolve to the lexicographically smallest mask. Throws SearchTooLarge when
// more than `guard` masks would be evaluated.
SolverResult solve_exhaustive(const SwitchOffProblem& problem, std::uint64_t guard = kExhaustiveGuard);

struct GaParams {
  std::size_t pop_size = 80;
  std::size_t generations = 200;
  std::size_t tournament_k = 3;
  double crossover_rate = 0.9;
  std::optional<double> mutation_rate;  // default 1 / n_beams

  void validate() const;
};

// Binary genetic algorithm: tournament selection, uniform crossover, bit-flip
// mutation, greedy repair (drop the beam whose removal hurts least until the
// mask is feasible) and elitism of one. Deterministic for a given seed.
SolverResult solve_ga(const SwitchOffProblem& problem, const GaParams& params, std::uint64_t seed);

struct DbscanSelectParams {
  double eps = 0.5;          // feature-space radius
  std::size_t min_pts = 8;
  double rsrp_weight = 0.1;  // m per dB applied to the RSRP axis
};

// Clusters the bursts where each beam is strongest in (x, y, weight * rsrp),
// ranks beams by core-point count (then raw strongest count, then index) and
// switches on the top xi.
SolverResult solve_dbscan(const SwitchOffProblem& problem, const DbscanSelectParams& params);

}  // namespace beamfactory
