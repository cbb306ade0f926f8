#include "beamfactory/link.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"

namespace beamfactory {

int LinkBudget::numerology() const {
  const double ratio = scs / 15e3;
  const double n = std::log2(ratio);
  const double rounded = std::round(n);
  if (!(ratio >= 1.0) || std::abs(n - rounded) > 1e-9) {
    throw InvalidArgument(fmt::format("subcarrier spacing {} Hz is not 15 kHz * 2^n", scs));
  }
  return static_cast<int>(rounded);
}

void LinkBudget::validate() const {
  if (!std::isfinite(p_c)) throw InvalidArgument("p_c must be finite");
  if (n_rb < 1) throw InvalidArgument("n_rb must be >= 1");
  if (!(carrier_freq > 0.0)) throw InvalidArgument("carrier frequency must be > 0");
  if (!(carrier_bandwidth > 0.0)) throw InvalidArgument("carrier bandwidth must be > 0");
  if (!std::isfinite(g_rx)) throw InvalidArgument("g_rx must be finite");
  if (!std::isfinite(noise_floor)) throw InvalidArgument("noise floor must be finite");
  numerology();
}

void SsbTiming::validate() const {
  if (!(burst_periodicity > 0.0) || !(burst_duration > 0.0) || !(symbol_duration > 0.0)) {
    throw InvalidArgument("SSB timing values must be > 0");
  }
  if (!(burst_duration < burst_periodicity)) {
    throw InvalidArgument("burst duration must be shorter than the burst periodicity");
  }
}

double tx_power_per_re(const LinkBudget& budget) {
  return budget.p_c - 10.0 * std::log10(static_cast<double>(budget.n_re()));
}

double doppler_shift(double speed_mps, double freq_hz) {
  if (!(speed_mps >= 0.0)) throw InvalidArgument("speed must be >= 0");
  return speed_mps * freq_hz / kSpeedOfLight;
}

std::optional<std::size_t> strongest_entry(const MeasurementSample& sample) {
  if (sample.beams.empty()) return std::nullopt;
  constexpr double kTieTolDb = 1e-9;
  std::size_t best = 0;
  for (std::size_t k = 1; k < sample.beams.size(); ++k) {
    if (sample.beams[k].rsrp_dbm > sample.beams[best].rsrp_dbm + kTieTolDb) best = k;
  }
  return best;
}

LinkTerms link_terms(const SceneView& scene, Point2 p) {
  LinkTerms t;
  t.visibility = scene.layout.classify_visibility(p);
  t.angles = scene.layout.angles_to_tx(p);
  const PathGainModel& model = t.visibility == Visibility::LoS ? scene.model_los : scene.model_nlos;
  t.pg_mean = path_gain_mean(model, t.angles.distance_3d);
  t.shadowing = model.sigma == 0.0 ? 0.0 : model.sigma * scene.shadowing.sample_unit(p);
  t.blocking = scene.layout.blocking_loss_db(p);
  return t;
}

std::vector<BeamRsrp> synthesize_rsrp(const SceneView& scene, Point2 p, double fading_db) {
  const LinkTerms t = link_terms(scene, p);
  const double common = t.path_gain() + fading_db + tx_power_per_re(scene.budget) -
                        effective_gain_correction(t.visibility) + scene.budget.g_rx;
  std::vector<BeamRsrp> out;
  out.reserve(scene.beams.size());
  for (const auto& beam : scene.beams.beams) {
    const double g_tx =
        beam_gain(beam, t.angles.azimuth_deg, t.angles.downtilt_deg, scene.beams.floor_db);
    const double rsrp = common + g_tx;
    if (rsrp >= scene.budget.noise_floor) out.push_back({beam.id, rsrp});
  }
  return out;
}

double extract_path_gain(const BeamRsrp& entry, Point2 position, const LinkBudget& budget,
                         const BeamGridConfig& cfg, const FactoryLayout& layout) {
  const auto idx = cfg.index_of(entry.id);
  if (!idx) {
    throw InvalidArgument(fmt::format("beam {} is not part of the active configuration",
                                      to_string(entry.id)));
  }
  const Visibility vis = layout.classify_visibility(position);
  const TxAngles a = layout.angles_to_tx(position);
  const double g_tx = beam_gain(cfg.beams[*idx], a.azimuth_deg, a.downtilt_deg, cfg.floor_db);
  return entry.rsrp_dbm - tx_power_per_re(budget) - (g_tx - effective_gain_correction(vis)) -
         budget.g_rx;
}

std::uint64_t burst_seed(std::uint64_t campaign_seed, std::uint64_t burst_index) {
  // splitmix64 finalizer over a combination of both inputs
  std::uint64_t z = campaign_seed + 0x9e3779b97f4a7c15ULL * (burst_index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MeasurementTrace run_campaign(const SceneView& scene, std::span<const RouteSpec> routes,
                              const SsbTiming& timing, const CampaignOptions& options) {
  if (routes.empty()) throw InvalidArgument("campaign needs at least one route");
  timing.validate();
  scene.budget.validate();
  if (!(options.fading_sigma >= 0.0)) throw InvalidArgument("fading sigma must be >= 0");

  std::vector<Point2> positions;
  std::string route_names;
  for (const auto& route : routes) {
    RouteSpec at_burst_rate = route;
    at_burst_rate.sample_period = timing.burst_periodicity;
    const auto samples = sample_route(at_burst_rate);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (!scene.layout.contains(samples[k].position)) {
        throw OutOfLayoutError(fmt::format(
            "route '{}' leaves the layout at sample {} ({:.3f}, {:.3f})", route.name, k,
            samples[k].position.x, samples[k].position.y));
      }
      positions.push_back(samples[k].position);
    }
    route_names += route_names.empty() ? "" : "+";
    route_names += route.name;
  }

  MeasurementTrace trace;
  trace.config = scene.beams.config;
  trace.meta = {options.seed, options.model_name, route_names};
  trace.samples.resize(positions.size());

  const auto synthesize_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      double fading = 0.0;
      if (options.fading_sigma > 0.0) {
        std::mt19937_64 rng(burst_seed(options.seed, k));
        std::normal_distribution<double> normal(0.0, options.fading_sigma);
        fading = normal(rng);
      }
      auto& s = trace.samples[k];
      s.time = static_cast<double>(k) * timing.burst_periodicity;
      s.position = positions[k];
      s.beams = synthesize_rsrp(scene, positions[k], fading);
    }
  };

  const std::size_t n = positions.size();
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    synthesize_range(0, n);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      const std::size_t chunk = (n + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
          try {
            synthesize_range(begin, end);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return trace;
}

}  // namespace beamfactory
