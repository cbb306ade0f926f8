#include "beamfactory/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "beamfactory/errors.hpp"
#include "beamfactory/propagation.hpp"

namespace beamfactory {

// --- EmpiricalCdf -------------------------------------------------------------

EmpiricalCdf::EmpiricalCdf(std::vector<double> values) : values_(std::move(values)) {
  std::sort(values_.begin(), values_.end());
}

double EmpiricalCdf::probability_below(double x) const {
  if (values_.empty()) throw InvalidArgument("empty distribution");
  const auto it = std::lower_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double EmpiricalCdf::quantile(double p) const {
  if (values_.empty()) throw InvalidArgument("empty distribution");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile probability outside [0, 1]");
  const double h = p * static_cast<double>(values_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values_.size()) return values_.back();
  return values_[lo] + (h - static_cast<double>(lo)) * (values_[lo + 1] - values_[lo]);
}

std::vector<std::pair<double, double>> EmpiricalCdf::points() const {
  std::vector<std::pair<double, double>> out;
  out.reserve(values_.size());
  const auto n = static_cast<double>(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) {
    out.emplace_back(values_[k], static_cast<double>(k + 1) / n);
  }
  return out;
}

// --- Grid averaging -----------------------------------------------------------

std::size_t GridStat::populated() const {
  return static_cast<std::size_t>(
      std::count_if(mean.begin(), mean.end(), [](const auto& m) { return m.has_value(); }));
}

GridStat local_average(const MeasurementTrace& trace, const GridSpec& grid, AveragingDomain domain) {
  if (trace.empty()) throw InvalidArgument("cannot average an empty trace");
  std::vector<double> sum(grid.size(), 0.0);
  GridStat out{grid, std::vector<std::optional<double>>(grid.size()),
               std::vector<std::size_t>(grid.size(), 0)};
  for (const auto& s : trace.samples) {
    const auto best = strongest_entry(s);
    if (!best) continue;
    const std::size_t cell = grid.flat(grid.index_of(s.position));
    const double v = s.beams[*best].rsrp_dbm;
    sum[cell] += domain == AveragingDomain::dB ? v : std::pow(10.0, v / 10.0);
    ++out.count[cell];
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (out.count[c] == 0) continue;
    const double m = sum[c] / static_cast<double>(out.count[c]);
    out.mean[c] = domain == AveragingDomain::dB ? m : 10.0 * std::log10(m);
  }
  return out;
}

ComparisonMap gamma_map(const GridStat& a, const GridStat& b) {
  if (!(a.grid == b.grid)) throw InvalidArgument("gamma map needs identical grids");
  ComparisonMap out{a.grid, std::vector<std::optional<double>>(a.grid.size())};
  for (std::size_t c = 0; c < a.grid.size(); ++c) {
    if (a.mean[c] && b.mean[c]) out.gamma[c] = *a.mean[c] - *b.mean[c];
  }
  return out;
}

// --- Coverage -----------------------------------------------------------------

std::vector<CoverageBin> coverage_probability(const MeasurementTrace& trace, double threshold_dbm,
                                              std::span<const DistanceBin> bins,
                                              const FactoryLayout& layout) {
  std::vector<DistanceBin> sorted(bins.begin(), bins.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const DistanceBin& l, const DistanceBin& r) { return l.d_lo < r.d_lo; });
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (!(sorted[k].d_hi > sorted[k].d_lo)) {
      throw InvalidArgument(fmt::format("distance bin [{}, {}) is empty or inverted", sorted[k].d_lo,
                                        sorted[k].d_hi));
    }
    if (k > 0 && sorted[k].d_lo < sorted[k - 1].d_hi) {
      throw InvalidArgument("distance bins overlap");
    }
  }

  std::vector<std::vector<double>> values(bins.size());
  for (const auto& s : trace.samples) {
    const auto best = strongest_entry(s);
    if (!best) continue;
    const double d = layout.angles_to_tx(s.position).distance_3d;
    for (std::size_t k = 0; k < bins.size(); ++k) {
      if (d >= bins[k].d_lo && d < bins[k].d_hi) {
        values[k].push_back(s.beams[*best].rsrp_dbm);
        break;
      }
    }
  }

  std::vector<CoverageBin> out;
  out.reserve(bins.size());
  for (std::size_t k = 0; k < bins.size(); ++k) {
    CoverageBin cb;
    cb.bin = bins[k];
    cb.count = values[k].size();
    cb.cdf = EmpiricalCdf(std::move(values[k]));
    if (cb.count > 0) cb.probability = cb.cdf.probability_below(threshold_dbm);
    out.push_back(std::move(cb));
  }
  return out;
}

// --- Beam recovery deltas -------------------------------------------------------

BeamDeltaStats delta_stats(const MeasurementTrace& trace, int max_i) {
  if (max_i < 2) throw InvalidArgument("max_i must be >= 2");
  BeamDeltaStats out;
  out.max_i = max_i;
  std::vector<std::vector<double>> pooled(static_cast<std::size_t>(max_i - 1));
  std::vector<double> rsrp;
  for (const auto& s : trace.samples) {
    if (s.beams.size() < 2) continue;
    rsrp.clear();
    for (const auto& e : s.beams) rsrp.push_back(e.rsrp_dbm);
    std::sort(rsrp.begin(), rsrp.end(), std::greater<>());
    const std::size_t orders = std::min<std::size_t>(rsrp.size(), static_cast<std::size_t>(max_i));
    std::vector<double> burst;
    burst.reserve(orders - 1);
    for (std::size_t i = 1; i < orders; ++i) {
      const double delta = rsrp.front() - rsrp[i];
      burst.push_back(delta);
      pooled[i - 1].push_back(delta);
    }
    out.per_burst.push_back(std::move(burst));
  }
  if (out.per_burst.empty()) throw InvalidArgument("no burst reports two or more beams");
  for (auto& p : pooled) out.by_order.emplace_back(std::move(p));
  return out;
}

// --- Route smoothing ------------------------------------------------------------

SmoothedRoute route_smoothing(std::span<const MeasurementSample> samples,
                              const FactoryLayout& layout, double carrier_freq,
                              double window_wavelengths) {
  if (samples.empty()) throw InvalidArgument("route slice is empty");
  if (!(window_wavelengths > 0.0)) throw InvalidArgument("window must be > 0 wavelengths");
  SmoothedRoute out;
  out.window_m = window_wavelengths * wavelength(carrier_freq);

  const std::size_t n = samples.size();
  out.traveled.resize(n, 0.0);
  out.azimuth.resize(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) out.traveled[k] = out.traveled[k - 1] + distance(samples[k - 1].position, samples[k].position);
    out.azimuth[k] = layout.angles_to_tx(samples[k].position).azimuth_deg;
  }
  for (const auto& s : samples) {
    for (const auto& e : s.beams) {
      const auto pos = std::lower_bound(out.beams.begin(), out.beams.end(), e.id);
      if (pos == out.beams.end() || *pos != e.id) out.beams.insert(pos, e.id);
    }
  }
  const std::size_t nb = out.beams.size();
  // dense[k][b], NaN where the beam is absent
  std::vector<double> dense(n * nb, std::nan(""));
  for (std::size_t k = 0; k < n; ++k) {
    for (const auto& e : samples[k].beams) {
      const auto b = static_cast<std::size_t>(
          std::lower_bound(out.beams.begin(), out.beams.end(), e.id) - out.beams.begin());
      dense[k * nb + b] = e.rsrp_dbm;
    }
  }

  const auto average = [&](std::size_t b, std::size_t lo, std::size_t hi) -> std::optional<double> {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = lo; j < hi; ++j) {
      const double v = dense[j * nb + b];
      if (std::isnan(v)) continue;
      sum += v;
      ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
  };

  out.rsrp.assign(nb, std::vector<std::optional<double>>(n));
  out.degenerate = out.window_m > out.traveled.back();
  if (out.degenerate) {
    for (std::size_t b = 0; b < nb; ++b) {
      const auto v = average(b, 0, n);
      std::fill(out.rsrp[b].begin(), out.rsrp[b].end(), v);
    }
    return out;
  }

  const double half = out.window_m / 2.0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    while (out.traveled[lo] < out.traveled[k] - half) ++lo;
    while (hi < n && out.traveled[hi] <= out.traveled[k] + half) ++hi;
    for (std::size_t b = 0; b < nb; ++b) out.rsrp[b][k] = average(b, lo, hi);
  }
  return out;
}

// --- Dominance ------------------------------------------------------------------

DominanceMap dominance_map(const MeasurementTrace& trace, std::span<const SsbId> subset,
                           const GridSpec& grid) {
  if (subset.empty()) throw InvalidArgument("dominance subset is empty");
  const BeamGridConfig table = make_config(trace.config);
  for (const auto& id : subset) {
    if (!table.contains(id)) {
      throw InvalidArgument(fmt::format("beam {} is not part of configuration {}", to_string(id),
                                        to_string(trace.config)));
    }
  }
  std::vector<std::size_t> hits(grid.size(), 0);
  DominanceMap out{grid, std::vector<std::optional<double>>(grid.size()),
                   std::vector<std::size_t>(grid.size(), 0)};
  for (const auto& s : trace.samples) {
    const auto best = strongest_entry(s);
    if (!best) continue;
    const std::size_t cell = grid.flat(grid.index_of(s.position));
    ++out.count[cell];
    if (std::find(subset.begin(), subset.end(), s.beams[*best].id) != subset.end()) ++hits[cell];
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (out.count[c] > 0) {
      out.fraction[c] = static_cast<double>(hits[c]) / static_cast<double>(out.count[c]);
    }
  }
  return out;
}

}  // namespace beamfactory
