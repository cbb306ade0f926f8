#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace beamfactory {

enum class TxConfig { A, B };

std::string_view to_string(TxConfig c);
TxConfig parse_tx_config(std::string_view s);

// SSB identity: configuration, row (top to bottom) and column (left to right),
// both 1-based. Ordered by (config, row, col).
struct SsbId {
  TxConfig config = TxConfig::A;
  int row = 1;
  int col = 1;

  friend auto operator<=>(const SsbId&, const SsbId&) = default;
};

// "B-3-4"
std::string to_string(const SsbId& id);
SsbId parse_ssb_id(std::string_view s);

struct Beam {
  SsbId id;
  double boresight_az = 0.0;        // deg, from the panel normal
  double boresight_downtilt = 0.0;  // deg, positive below horizontal
  double hpbw_az = 10.0;
  double hpbw_el = 8.0;
  double peak_gain = 27.0;  // dBi
};

// Throws InvalidArgument when beamwidths fall outside the radio module's
// published ranges (8-12 deg horizontal, 6-10 deg vertical) or gain <= 0.
void validate_beam(const Beam& b);

// Directivity of an elliptical aperture from its half-power beamwidths.
double aperture_directivity_dbi(double hpbw_az_deg, double hpbw_el_deg);

inline constexpr double kDefaultPatternFloorDb = 30.0;

struct BeamGridConfig {
  TxConfig config = TxConfig::A;
  std::vector<Beam> beams;        // row-major, (row, col) ascending
  std::vector<int> row_counts;    // full table, even when beams were filtered
  std::vector<double> downtilts;  // per row, deg
  double az_min = 0.0;
  double az_max = 0.0;
  double floor_db = kDefaultPatternFloorDb;

  double az_span() const { return az_max - az_min; }
  std::size_t size() const { return beams.size(); }
  std::optional<std::size_t> index_of(const SsbId& id) const;
  bool contains(const SsbId& id) const { return index_of(id).has_value(); }

  // Copy holding only the listed beams (in this config's order). Throws
  // InvalidArgument on an unknown id.
  BeamGridConfig restricted_to(std::span<const SsbId> ids) const;
};

struct PatternDefaults {
  double hpbw_az = 10.0;
  double hpbw_el = 8.0;
  double peak_gain = 27.0;
  double floor_db = kDefaultPatternFloorDb;
};

// Full beam grid of configuration A (32 beams, rows 16/15/1, downtilts 0/7/15,
// azimuth [-30, 90]) or B (27 beams, rows 10/10/7, downtilts -7/0/8, azimuth
// [-75, 75]). Boresights sit at az_min + span * (k + 0.5) / row_count.
BeamGridConfig make_config(TxConfig which, const PatternDefaults& defaults = {});

// Parabolic-in-dB pattern clamped at peak - floor_db:
//   peak - 12 * ((daz / hpbw_az)^2 + (del / hpbw_el)^2)
double beam_gain(const Beam& beam, double az_deg, double downtilt_deg,
                 double floor_db = kDefaultPatternFloorDb);

// Index of the beam with the highest gain toward (az, downtilt); equal gains
// go to the lowest (row, col).
std::size_t strongest_beam_index(const BeamGridConfig& cfg, double az_deg, double downtilt_deg);
SsbId strongest_beam_free_space(const BeamGridConfig& cfg, double az_deg, double downtilt_deg);

}  // namespace beamfactory
