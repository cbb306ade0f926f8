#include "beamfactory/beams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"
#include "beamfactory/geometry.hpp"

namespace beamfactory {

std::string_view to_string(TxConfig c) { return c == TxConfig::A ? "A" : "B"; }

TxConfig parse_tx_config(std::string_view s) {
  if (s == "A" || s == "a") return TxConfig::A;
  if (s == "B" || s == "b") return TxConfig::B;
  throw InvalidArgument(fmt::format("unknown TX configuration '{}' (expected A or B)", s));
}

std::string to_string(const SsbId& id) {
  return fmt::format("{}-{}-{}", to_string(id.config), id.row, id.col);
}

SsbId parse_ssb_id(std::string_view s) {
  const auto bad = [&] { return InvalidArgument(fmt::format("malformed SSB id '{}'", s)); };
  const auto d1 = s.find('-');
  if (d1 == std::string_view::npos) throw bad();
  const auto d2 = s.find('-', d1 + 1);
  if (d2 == std::string_view::npos) throw bad();
  SsbId id;
  id.config = parse_tx_config(s.substr(0, d1));
  const auto parse_int = [&](std::string_view part, int& out) {
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    if (ec != std::errc{} || ptr != part.data() + part.size() || out < 1) throw bad();
  };
  parse_int(s.substr(d1 + 1, d2 - d1 - 1), id.row);
  parse_int(s.substr(d2 + 1), id.col);
  return id;
}

void validate_beam(const Beam& b) {
  if (b.hpbw_az < 8.0 || b.hpbw_az > 12.0) {
    throw InvalidArgument(fmt::format("{}: hpbw_az {} outside [8, 12] deg", to_string(b.id), b.hpbw_az));
  }
  if (b.hpbw_el < 6.0 || b.hpbw_el > 10.0) {
    throw InvalidArgument(fmt::format("{}: hpbw_el {} outside [6, 10] deg", to_string(b.id), b.hpbw_el));
  }
  if (!(b.peak_gain > 0.0)) {
    throw InvalidArgument(fmt::format("{}: peak_gain must be > 0 dBi", to_string(b.id)));
  }
}

double aperture_directivity_dbi(double hpbw_az_deg, double hpbw_el_deg) {
  return 10.0 * std::log10(41253.0 / (hpbw_az_deg * hpbw_el_deg));
}

std::optional<std::size_t> BeamGridConfig::index_of(const SsbId& id) const {
  const auto it = std::lower_bound(beams.begin(), beams.end(), id,
                                   [](const Beam& b, const SsbId& key) { return b.id < key; });
  if (it == beams.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - beams.begin());
}

BeamGridConfig BeamGridConfig::restricted_to(std::span<const SsbId> ids) const {
  BeamGridConfig out = *this;
  out.beams.clear();
  for (const auto& b : beams) {
    if (std::find(ids.begin(), ids.end(), b.id) != ids.end()) out.beams.push_back(b);
  }
  for (const auto& id : ids) {
    if (!contains(id)) {
      throw InvalidArgument(fmt::format("beam {} is not part of configuration {}", to_string(id),
                                        to_string(config)));
    }
  }
  return out;
}

BeamGridConfig make_config(TxConfig which, const PatternDefaults& defaults) {
  BeamGridConfig cfg;
  cfg.config = which;
  cfg.floor_db = defaults.floor_db;
  if (which == TxConfig::A) {
    cfg.row_counts = {16, 15, 1};
    cfg.downtilts = {0.0, 7.0, 15.0};
    cfg.az_min = -30.0;
    cfg.az_max = 90.0;
  } else {
    cfg.row_counts = {10, 10, 7};
    cfg.downtilts = {-7.0, 0.0, 8.0};
    cfg.az_min = -75.0;
    cfg.az_max = 75.0;
  }
  const double span = cfg.az_span();
  for (std::size_t r = 0; r < cfg.row_counts.size(); ++r) {
    const int count = cfg.row_counts[r];
    for (int c = 0; c < count; ++c) {
      Beam b;
      b.id = {which, static_cast<int>(r) + 1, c + 1};
      b.boresight_az = cfg.az_min + span * (c + 0.5) / count;
      b.boresight_downtilt = cfg.downtilts[r];
      b.hpbw_az = defaults.hpbw_az;
      b.hpbw_el = defaults.hpbw_el;
      b.peak_gain = defaults.peak_gain;
      validate_beam(b);
      cfg.beams.push_back(b);
    }
  }
  return cfg;
}

double beam_gain(const Beam& beam, double az_deg, double downtilt_deg, double floor_db) {
  const double daz = wrap_degrees(az_deg - beam.boresight_az) / beam.hpbw_az;
  const double del = (downtilt_deg - beam.boresight_downtilt) / beam.hpbw_el;
  const double attenuation = std::min(12.0 * (daz * daz + del * del), floor_db);
  return beam.peak_gain - attenuation;
}

std::size_t strongest_beam_index(const BeamGridConfig& cfg, double az_deg, double downtilt_deg) {
  if (cfg.beams.empty()) throw InvalidArgument("beam configuration is empty");
  constexpr double kTieTolDb = 1e-9;
  std::size_t best = 0;
  double best_gain = beam_gain(cfg.beams[0], az_deg, downtilt_deg, cfg.floor_db);
  for (std::size_t k = 1; k < cfg.beams.size(); ++k) {
    const double g = beam_gain(cfg.beams[k], az_deg, downtilt_deg, cfg.floor_db);
    if (g > best_gain + kTieTolDb) {
      best = k;
      best_gain = g;
    }
  }
  return best;
}

SsbId strongest_beam_free_space(const BeamGridConfig& cfg, double az_deg, double downtilt_deg) {
  return cfg.beams[strongest_beam_index(cfg, az_deg, downtilt_deg)].id;
}

}  // namespace beamfactory
