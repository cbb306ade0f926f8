#include "beamfactory/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"

namespace beamfactory {

void PathGainModel::validate() const {
  if (!(n > 0.0)) throw InvalidArgument("path-loss exponent n must be > 0");
  if (!(sigma >= 0.0)) throw InvalidArgument("shadowing sigma must be >= 0");
  if (!std::isfinite(pg_1m)) throw InvalidArgument("pg_1m must be finite");
}

namespace {

constexpr std::array<PresetInfo, 7> kPresets{{
    {ModelPreset::MeasFitLoS, "measfit-los", "Measurement Fit (LoS)", Visibility::LoS, {-58.8, 2.29, 4.6}, 1.0, 26.0},
    {ModelPreset::Friis, "friis", "Friis Free Space", Visibility::LoS, {-60.9, 2.00, 0.0}, 1.0, 26.0},
    {ModelPreset::CiLoSSc, "ci-los-sc", "CI PG LoS - SC", Visibility::LoS, {-60.9, 1.98, 4.3}, 1.0, 26.0},
    {ModelPreset::InfLoS, "inf-los", "3GPP TR 38.901 InF LoS", Visibility::LoS, {-58.9, 2.15, 4.3}, 1.0, 26.0},
    {ModelPreset::MeasFitNLoS, "measfit-nlos", "Measurement Fit (NLoS)", Visibility::NLoS, {-39.6, 4.40, 5.8}, 1.0, 40.0},
    {ModelPreset::InfNLoSDl, "inf-nlos-dl", "3GPP TR 38.901 InF NLoS DL", Visibility::NLoS, {-47.1, 3.57, 7.2}, 1.0, 40.0},
    {ModelPreset::Chizhik, "chizhik", "D. Chizhik et al.", Visibility::NLoS, {-41.9, 4.04, 0.0}, 1.0, 40.0},
}};

}  // namespace

std::span<const PresetInfo> preset_table() { return kPresets; }

const PresetInfo& preset_info(ModelPreset p) {
  for (const auto& info : kPresets) {
    if (info.preset == p) return info;
  }
  throw InvalidArgument("unknown preset");
}

PathGainModel preset_model(ModelPreset p) { return preset_info(p).model; }

ModelPreset parse_preset(std::string_view name) {
  std::string names;
  for (const auto& info : kPresets) {
    if (info.name == name) return info.preset;
    names += names.empty() ? "" : ", ";
    names += info.name;
  }
  throw InvalidArgument(fmt::format("unknown path gain preset '{}' (available: {})", name, names));
}

double path_gain_mean(const PathGainModel& model, double d) {
  if (!(d >= 1.0)) {
    throw DomainError(fmt::format("distance {} m is below the 1 m model reference", d));
  }
  return model.pg_1m - 10.0 * model.n * std::log10(d);
}

double friis_pg1m(double freq_hz) {
  if (!(freq_hz > 0.0)) throw InvalidArgument("frequency must be > 0");
  return -20.0 * std::log10(4.0 * std::numbers::pi * freq_hz * 1.0 / kSpeedOfLight);
}

double effective_gain_correction(Visibility vis) { return vis == Visibility::LoS ? 1.0 : 4.9; }

PathGainModel fit_slope_intercept(std::span<const DistanceSample> samples) {
  if (samples.size() < 3) {
    throw DegenerateFitError(fmt::format("need at least 3 samples, got {}", samples.size()));
  }
  const auto n = static_cast<double>(samples.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& s : samples) {
    if (!(s.d >= 1.0)) throw DomainError(fmt::format("sample distance {} m is below 1 m", s.d));
    mean_x += std::log10(s.d);
    mean_y += s.pg;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& s : samples) {
    const double dx = std::log10(s.d) - mean_x;
    sxx += dx * dx;
    sxy += dx * (s.pg - mean_y);
  }
  if (sxx <= 1e-12 * n) throw DegenerateFitError("all samples share one distance");

  const double slope = sxy / sxx;
  PathGainModel m;
  m.pg_1m = mean_y - slope * mean_x;
  m.n = -slope / 10.0;

  double ssr = 0.0;
  for (const auto& s : samples) {
    const double r = s.pg - (m.pg_1m + slope * std::log10(s.d));
    ssr += r * r;
  }
  m.sigma = std::sqrt(ssr / (n - 2.0));
  return m;
}

double model_rmse(const PathGainModel& model, std::span<const DistanceSample> samples) {
  if (samples.empty()) throw InvalidArgument("model_rmse needs at least one sample");
  double acc = 0.0;
  for (const auto& s : samples) {
    const double r = s.pg - path_gain_mean(model, s.d);
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace beamfactory
