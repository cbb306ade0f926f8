#pragma once

#include <array>
#include <span>
#include <string_view>

#include "beamfactory/layout.hpp"

namespace beamfactory {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

// Slope-intercept path gain: PG(d) = pg_1m - 10 n log10(d) + N(0, sigma^2).
struct PathGainModel {
  double pg_1m = 0.0;  // dB at the 1 m reference distance
  double n = 2.0;      // path-loss exponent
  double sigma = 0.0;  // dB

  void validate() const;
};

enum class ModelPreset {
  MeasFitLoS,
  Friis,
  CiLoSSc,
  InfLoS,
  MeasFitNLoS,
  InfNLoSDl,
  Chizhik,
};

struct PresetInfo {
  ModelPreset preset;
  std::string_view name;     // stable key used in scenario files and CSVs
  std::string_view label;    // human-readable row label
  Visibility block;          // LoS or NLoS table block
  PathGainModel model;
  double d_min;              // distance range the preset is exercised over, m
  double d_max;
};

// Reference slope-intercept models for factories at 26 GHz, in table order:
// the LoS block (measurement fit, Friis, CI sparse clutter, InF LoS) followed
// by the NLoS block (measurement fit, InF NLoS DL, Chizhik). Presets with no
// published sigma carry sigma = 0 and are meant for mean-line scoring.
std::span<const PresetInfo> preset_table();
const PresetInfo& preset_info(ModelPreset p);
PathGainModel preset_model(ModelPreset p);
// Throws InvalidArgument for an unknown name; the message lists valid names.
ModelPreset parse_preset(std::string_view name);

// Deterministic part of the slope-intercept model. Throws DomainError for
// d < 1 m; the model is anchored at 1 m and never extrapolated below it.
double path_gain_mean(const PathGainModel& model, double d);

// Free-space gain at 1 m: -20 log10(4 pi f / c).
double friis_pg1m(double freq_hz);

inline double wavelength(double freq_hz) { return kSpeedOfLight / freq_hz; }

// Median effective TX gain degradation from scattering/obstruction:
// 1 dB in LoS, 4.9 dB in NLoS.
double effective_gain_correction(Visibility vis);

struct DistanceSample {
  double d = 0.0;   // m
  double pg = 0.0;  // dB
};

// OLS of pg against log10(d): intercept -> pg_1m, slope -> -10 n, sigma is
// the residual standard deviation (n - 2 degrees of freedom). Throws
// DegenerateFitError with fewer than 3 samples or a single distinct distance.
PathGainModel fit_slope_intercept(std::span<const DistanceSample> samples);

// Root-mean-square of pg - path_gain_mean(model, d). Throws InvalidArgument on
// an empty sample set.
double model_rmse(const PathGainModel& model, std::span<const DistanceSample> samples);

}  // namespace beamfactory
