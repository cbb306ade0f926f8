#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamfactory/beams.hpp"
#include "beamfactory/layout.hpp"
#include "beamfactory/propagation.hpp"
#include "beamfactory/shadowing.hpp"

namespace beamfactory {

struct LinkBudget {
  double p_c = 21.2;                 // total carrier power, dBm
  double carrier_bandwidth = 100e6;  // Hz
  double scs = 120e3;                // Hz
  int n_rb = 66;
  double g_rx = 0.0;                 // dBi
  double carrier_freq = 26.0e9;      // Hz
  double noise_floor = -120.0;       // dBm; weaker entries are not reported
  double sss_bandwidth = 15.24e6;    // Hz, metadata only

  int n_re() const { return 12 * n_rb; }
  // n such that scs = 15 kHz * 2^n. Throws InvalidArgument otherwise.
  int numerology() const;
  void validate() const;
};

struct SsbTiming {
  double burst_periodicity = 0.020;  // s
  double burst_duration = 0.005;     // s
  double symbol_duration = 8.91e-6;  // s, OFDM symbol incl. cyclic prefix

  void validate() const;
};

// Power on one resource element: p_c - 10 log10(n_re).
double tx_power_per_re(const LinkBudget& budget);

// speed * freq / c
double doppler_shift(double speed_mps, double freq_hz);

struct BeamRsrp {
  SsbId id;
  double rsrp_dbm = 0.0;

  friend bool operator==(const BeamRsrp&, const BeamRsrp&) = default;
};

struct MeasurementSample {
  double time = 0.0;
  Point2 position;
  std::vector<BeamRsrp> beams;  // ascending SsbId, at most one entry per id

  friend bool operator==(const MeasurementSample&, const MeasurementSample&) = default;
};

// Index into sample.beams of the strongest entry; equal powers (within 1e-9 dB)
// go to the lowest (row, col). nullopt for a sample with no detected beam.
std::optional<std::size_t> strongest_entry(const MeasurementSample& sample);

struct TraceMetadata {
  std::uint64_t seed = 0;
  std::string model_name;
  std::string route_name;
};

struct MeasurementTrace {
  TxConfig config = TxConfig::A;
  std::vector<MeasurementSample> samples;
  TraceMetadata meta;

  bool empty() const { return samples.empty(); }
};

// Inputs shared by every synthesized link. References must outlive the view.
struct SceneView {
  const FactoryLayout& layout;
  const BeamGridConfig& beams;
  const PathGainModel& model_los;
  const PathGainModel& model_nlos;
  const ShadowingField& shadowing;
  const LinkBudget& budget;
};

// Beam-independent part of the received power at one location.
struct LinkTerms {
  Visibility visibility = Visibility::LoS;
  TxAngles angles;
  double pg_mean = 0.0;    // dB, deterministic slope-intercept term
  double shadowing = 0.0;  // dB, unit field scaled by the selected model's sigma
  double blocking = 0.0;   // dB, excess loss from blocking regions (>= 0)

  double path_gain() const { return pg_mean + shadowing - blocking; }
};

LinkTerms link_terms(const SceneView& scene, Point2 p);

// Received power per beam:
//   PG(d) + shadowing - blocking + fading + P_TX/RE + (G_TX(az, el) - correction) + G_RX
// with the model picked by visibility and one shadowing draw shared by every
// beam. Entries below budget.noise_floor are dropped.
std::vector<BeamRsrp> synthesize_rsrp(const SceneView& scene, Point2 p, double fading_db = 0.0);

// Inverse of the budget arithmetic in synthesize_rsrp: returns the path gain
// (including shadowing, blocking and fading) that produced `entry` at
// `position`. Throws InvalidArgument for a beam outside `cfg`.
double extract_path_gain(const BeamRsrp& entry, Point2 position, const LinkBudget& budget,
                         const BeamGridConfig& cfg, const FactoryLayout& layout);

struct CampaignOptions {
  std::uint64_t seed = 0;
  double fading_sigma = 0.0;  // dB, per-sample small-scale term; 0 disables
  unsigned workers = 1;       // synthesis threads; output does not depend on it
  std::string model_name;
};

// Walks every route at the burst periodicity and synthesizes one sample per
// burst. Timestamps are k * burst_periodicity over the concatenated routes.
// Throws OutOfLayoutError naming the first sample that leaves the layout.
MeasurementTrace run_campaign(const SceneView& scene, std::span<const RouteSpec> routes,
                              const SsbTiming& timing, const CampaignOptions& options);

// Seed for burst k derived from the campaign seed (splitmix64 mixing).
std::uint64_t burst_seed(std::uint64_t campaign_seed, std::uint64_t burst_index);

}  // namespace beamfactory
