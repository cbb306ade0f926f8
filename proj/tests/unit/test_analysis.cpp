#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <random>

#include "beamfactory/analysis.hpp"
#include "beamfactory/errors.hpp"
#include "test_support.hpp"

using namespace beamfactory;
using bf_test::burst;
using bf_test::entry;
using bf_test::single_hall;

namespace {

constexpr auto B = TxConfig::B;

MeasurementTrace trace_of(std::vector<MeasurementSample> s) {
  MeasurementTrace t;
  t.config = B;
  t.samples = std::move(s);
  return t;
}

// Random trace over [0, w) x [0, h) with 0-5 beams per burst from config B.
MeasurementTrace random_trace(std::mt19937_64& rng, std::size_t n, double w, double h) {
  const auto cfg = make_config(B);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MeasurementSample> out;
  for (std::size_t k = 0; k < n; ++k) {
    MeasurementSample s{0.02 * static_cast<double>(k), {w * u(rng) * 0.999, h * u(rng) * 0.999}, {}};
    const int beams = static_cast<int>(6 * u(rng));
    std::vector<std::size_t> pick(cfg.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(static_cast<std::size_t>(beams));
    std::sort(pick.begin(), pick.end());
    for (auto i : pick) s.beams.push_back({cfg.beams[i].id, -110 + 50 * u(rng)});
    out.push_back(std::move(s));
  }
  return trace_of(std::move(out));
}

}  // namespace

TEST(Cdf, QuantilesAndProbabilities) {
  const EmpiricalCdf c({4, 1, 3, 2});
  EXPECT_EQ(c.values(), (std::vector<double>{1, 2, 3, 4}));
  EXPECT_DOUBLE_EQ(c.quantile(0.0), 1.0);
  EXPECT_DOUBLE_EQ(c.quantile(0.5), 2.5);
  EXPECT_DOUBLE_EQ(c.quantile(1.0), 4.0);
  EXPECT_DOUBLE_EQ(c.probability_below(3.0), 0.5);
  EXPECT_DOUBLE_EQ(c.probability_below(3.5), 0.75);
  EXPECT_DOUBLE_EQ(c.points().back().second, 1.0);
  EXPECT_THROW(EmpiricalCdf{}.quantile(0.5), InvalidArgument);
  EXPECT_THROW(c.quantile(1.5), InvalidArgument);
}

TEST(LocalAverage, TwoBurstsInOneCell) {
  const auto t = trace_of({burst(0, {0.2, 0.2}, {entry(B, 1, 1, -70)}),
                           burst(0.02, {0.7, 0.4}, {entry(B, 1, 1, -85), entry(B, 2, 1, -80)})});
  const GridSpec g({0, 0}, 1, 1, 2, 2);
  const auto db = local_average(t, g);
  EXPECT_DOUBLE_EQ(*db.at({0, 0}), -75.0);
  EXPECT_EQ(db.count[0], 2u);
  EXPECT_FALSE(db.at({1, 0}).has_value());
  EXPECT_EQ(db.populated(), 1u);
  const auto mw = local_average(t, g, AveragingDomain::mW);
  EXPECT_NEAR(*mw.at({0, 0}), 10 * std::log10((1e-7 + 1e-8) / 2), 1e-9);
  EXPECT_THROW(local_average(trace_of({}), g), InvalidArgument);
  EXPECT_THROW(local_average(trace_of({burst(0, {5, 5}, {entry(B, 1, 1, -70)})}), g), OutOfGridError);
}

// Property: per-cell mean equals a map-based recomputation.
TEST(LocalAverage, MatchesBruteForce) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_trace(rng, 400, 7, 5);
    const auto g = GridSpec::covering({0, 0, 7, 5}, 1.3, 0.9);
    const auto stat = local_average(t, g);
    std::map<std::pair<int, int>, std::pair<double, int>> acc;
    for (const auto& s : t.samples) {
      if (s.beams.empty()) continue;
      double best = -1e9;
      for (const auto& e : s.beams) best = std::max(best, e.rsrp_dbm);
      const int i = static_cast<int>(std::floor(s.position.x / 1.3));
      const int j = static_cast<int>(std::floor(s.position.y / 0.9));
      acc[{i, j}].first += best;
      acc[{i, j}].second += 1;
    }
    EXPECT_EQ(stat.populated(), acc.size());
    for (const auto& [ij, v] : acc) {
      const GridIndex gi{static_cast<std::size_t>(ij.first), static_cast<std::size_t>(ij.second)};
      ASSERT_TRUE(stat.at(gi).has_value());
      EXPECT_NEAR(*stat.at(gi), v.first / v.second, 1e-9);
    }
  }
}

TEST(Gamma, AntisymmetricOnJointSupport) {
  std::mt19937_64 rng(4);
  const auto g = GridSpec::covering({0, 0, 6, 6}, 1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = local_average(random_trace(rng, 30, 6, 6), g);
    const auto b = local_average(random_trace(rng, 30, 6, 6), g);
    const auto ab = gamma_map(a, b);
    const auto ba = gamma_map(b, a);
    for (std::size_t c = 0; c < g.size(); ++c) {
      EXPECT_EQ(ab.gamma[c].has_value(), a.mean[c].has_value() && b.mean[c].has_value());
      if (ab.gamma[c]) {
        EXPECT_DOUBLE_EQ(*ab.gamma[c], -*ba.gamma[c]);
        EXPECT_DOUBLE_EQ(*ab.gamma[c], *a.mean[c] - *b.mean[c]);
      }
    }
    const auto self = gamma_map(a, a);
    for (const auto& v : self.gamma) {
      if (v) EXPECT_EQ(*v, 0.0);
    }
  }
  const auto other = local_average(random_trace(rng, 30, 6, 6), GridSpec::covering({0, 0, 6, 6}, 2, 2));
  EXPECT_THROW(gamma_map(other, local_average(random_trace(rng, 30, 6, 6), g)), InvalidArgument);
}

TEST(Coverage, HandFixture) {
  const auto layout = single_hall({0, 0, 30, 10}, {0, 5, 1.5}, Visibility::LoS);
  const auto t = trace_of({burst(0, {3, 5}, {entry(B, 1, 1, -90)}),
                           burst(1, {4, 5}, {entry(B, 1, 1, -105)}),
                           burst(2, {12, 5}, {entry(B, 1, 1, -101), entry(B, 1, 2, -99)}),
                           burst(3, {13, 5}, {}), burst(4, {25, 5}, {entry(B, 1, 1, -110)})});
  const std::vector<DistanceBin> bins{{0, 10}, {10, 20}, {20, 30}, {30, 40}};
  const auto cov = coverage_probability(t, -100.0, bins, layout);
  ASSERT_EQ(cov.size(), 4u);
  EXPECT_EQ(cov[0].count, 2u);
  EXPECT_DOUBLE_EQ(*cov[0].probability, 0.5);
  EXPECT_EQ(cov[1].count, 1u);
  EXPECT_DOUBLE_EQ(*cov[1].probability, 0.0);
  EXPECT_DOUBLE_EQ(*cov[2].probability, 1.0);
  EXPECT_FALSE(cov[3].probability.has_value());
  const std::vector<DistanceBin> overlap{{0, 10}, {5, 20}};
  EXPECT_THROW(coverage_probability(t, -100, overlap, layout), InvalidArgument);
  const std::vector<DistanceBin> inverted{{10, 5}};
  EXPECT_THROW(coverage_probability(t, -100, inverted, layout), InvalidArgument);
}

// Property: outage probability is non-decreasing in the threshold.
TEST(Coverage, MonotoneInThreshold) {
  std::mt19937_64 rng(8);
  const auto layout = single_hall({0, 0, 20, 20}, {0, 10, 3}, Visibility::NLoS);
  auto t = random_trace(rng, 2000, 20, 20);
  for (auto& s : t.samples) s.position.x = std::max(s.position.x, 0.5);
  const std::vector<DistanceBin> bins{{0, 5}, {5, 10}, {10, 15}, {15, 30}};
  std::vector<double> last(bins.size(), -1.0);
  for (double thr = -115; thr <= -55; thr += 2.5) {
    const auto cov = coverage_probability(t, thr, bins, layout);
    for (std::size_t k = 0; k < bins.size(); ++k) {
      ASSERT_TRUE(cov[k].probability.has_value());
      EXPECT_GE(*cov[k].probability, last[k]);
      last[k] = *cov[k].probability;
    }
  }
}

TEST(Delta, ThreeBeamExample) {
  const auto t = trace_of({burst(0, {}, {entry(B, 1, 1, -63), entry(B, 1, 2, -60), entry(B, 2, 1, -61)}),
                           burst(1, {}, {entry(B, 1, 1, -70)})});
  const auto d = delta_stats(t, 4);
  ASSERT_EQ(d.per_burst.size(), 1u);
  EXPECT_EQ(d.per_burst[0], (std::vector<double>{1.0, 3.0}));
  EXPECT_DOUBLE_EQ(d.percentile(2, 0.5), 1.0);
  EXPECT_DOUBLE_EQ(d.percentile(3, 0.5), 3.0);
  EXPECT_TRUE(d.order(4).empty());
  EXPECT_THROW(delta_stats(t, 1), InvalidArgument);
  EXPECT_THROW(delta_stats(trace_of({burst(0, {}, {entry(B, 1, 1, -70)})}), 3), InvalidArgument);
}

// Property: per burst the gaps are non-negative and non-decreasing in order,
// and agree with sorting the burst by hand.
TEST(Delta, OrderingAgainstSortOracle) {
  std::mt19937_64 rng(13);
  const auto t = random_trace(rng, 1000, 5, 5);
  const auto d = delta_stats(t, 5);
  std::size_t k = 0;
  for (const auto& s : t.samples) {
    if (s.beams.size() < 2) continue;
    std::vector<double> r;
    for (const auto& e : s.beams) r.push_back(e.rsrp_dbm);
    std::sort(r.rbegin(), r.rend());
    const auto& got = d.per_burst.at(k++);
    ASSERT_EQ(got.size(), std::min<std::size_t>(r.size(), 5) - 1);
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_DOUBLE_EQ(got[i], r[0] - r[i + 1]);
      EXPECT_GE(got[i], 0.0);
      if (i > 0) EXPECT_GE(got[i], got[i - 1]);
    }
  }
  EXPECT_EQ(k, d.per_burst.size());
}

namespace {

const FactoryLayout& corridor() {
  static const auto layout = single_hall({0, -10, 30, 10}, {0, 0, 1.5}, Visibility::LoS);
  return layout;
}

std::vector<MeasurementSample> line_samples(std::size_t n, double step,
                                            const std::function<double(double)>& rsrp) {
  std::vector<MeasurementSample> out;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = step * static_cast<double>(k);
    out.push_back(burst(0.02 * k, {1.0 + s, 0.0}, {entry(B, 2, 1, rsrp(s))}));
  }
  return out;
}

}  // namespace

TEST(Smoothing, WindowLengthAndConstantSeries) {
  const auto s = line_samples(500, 0.01, [](double) { return -72.5; });
  const auto r = route_smoothing(s, corridor(), 26e9);
  EXPECT_NEAR(r.window_m, 0.461, 0.001);
  EXPECT_FALSE(r.degenerate);
  ASSERT_EQ(r.beams.size(), 1u);
  for (const auto& v : r.rsrp[0]) EXPECT_DOUBLE_EQ(*v, -72.5);
  EXPECT_NEAR(r.traveled.back(), 4.99, 1e-9);
  for (double az : r.azimuth) EXPECT_NEAR(az, 0.0, 1e-9);
}

TEST(Smoothing, FastRippleIsSuppressed) {
  const auto ripple = [](double s) { return -70.0 + 3.0 * std::sin(2 * std::numbers::pi * s / 0.05); };
  const auto s = line_samples(2000, 0.005, ripple);
  const auto r = route_smoothing(s, corridor(), 26e9);
  double raw = 0, smooth = 0, mean = 0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double in = s[k].beams[0].rsrp_dbm + 70.0;
    const double out = *r.rsrp[0][k] + 70.0;
    raw += in * in;
    smooth += out * out;
    mean += out;
    ++n;
  }
  EXPECT_LT(std::sqrt(smooth / n), std::sqrt(raw / n) / 10.0);
  EXPECT_NEAR(mean / n, 0.0, 0.1);
}

TEST(Smoothing, DegenerateAndGaps) {
  auto s = line_samples(10, 0.01, [](double x) { return -60.0 - x; });
  const auto r = route_smoothing(s, corridor(), 26e9);
  EXPECT_TRUE(r.degenerate);
  const double avg = -60.0 - 0.045;
  for (const auto& v : r.rsrp[0]) EXPECT_NEAR(*v, avg, 1e-9);

  auto gaps = line_samples(400, 0.01, [](double) { return -65.0; });
  for (std::size_t k = 0; k < 100; ++k) gaps[k].beams.push_back(entry(B, 3, 2, -80.0));
  const auto g = route_smoothing(gaps, corridor(), 26e9);
  ASSERT_EQ(g.beams.size(), 2u);
  EXPECT_DOUBLE_EQ(*g.rsrp[1][0], -80.0);
  EXPECT_FALSE(g.rsrp[1][399].has_value());
  EXPECT_THROW(route_smoothing(std::vector<MeasurementSample>{}, corridor(), 26e9), InvalidArgument);
}

TEST(Dominance, HandFixture) {
  const auto t = trace_of({burst(0, {0.5, 0.5}, {entry(B, 1, 1, -60), entry(B, 2, 1, -65)}),
                           burst(1, {0.5, 0.5}, {entry(B, 1, 1, -70), entry(B, 2, 1, -65)}),
                           burst(2, {0.5, 0.5}, {}),
                           burst(3, {1.5, 0.5}, {entry(B, 2, 1, -70)})});
  const GridSpec g({0, 0}, 1, 1, 3, 1);
  const std::vector<SsbId> subset{{B, 1, 1}};
  const auto d = dominance_map(t, subset, g);
  EXPECT_DOUBLE_EQ(*d.at({0, 0}), 0.5);
  EXPECT_DOUBLE_EQ(*d.at({1, 0}), 0.0);
  EXPECT_FALSE(d.at({2, 0}).has_value());
  EXPECT_THROW(dominance_map(t, std::vector<SsbId>{}, g), InvalidArgument);
  EXPECT_THROW(dominance_map(t, std::vector<SsbId>{{B, 4, 1}}, g), InvalidArgument);
}

// Two co-row beams without shadowing, receiver level with the panel: the
// dominant beam follows from geometry alone (smaller azimuth offset wins, ties
// to the lower column). Samples stay inside +-20 deg so the closer beam is
// never on its pattern floor.
TEST(Dominance, TwoBeamGeometricOracle) {
  const auto layout = single_hall({0, 0, 30, 30}, {0, 15, 3}, Visibility::LoS, 3.0);
  const auto full = make_config(B);
  const std::vector<SsbId> ids{{B, 2, 5}, {B, 2, 6}};
  const auto cfg = full.restricted_to(ids);
  const PathGainModel los{-58.8, 2.29, 0.0};
  const PathGainModel nlos{-39.6, 4.4, 0.0};
  const auto field = ShadowingField::covering({0, 0, 30, 30}, 0.0, 10.0, 1);
  LinkBudget budget;
  budget.noise_floor = -300.0;
  const SceneView scene{layout, cfg, los, nlos, field, budget};

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MeasurementSample> samples;
  for (int k = 0; k < 3000; ++k) {
    const double a = (40 * u(rng) - 20) * std::numbers::pi / 180.0;
    const double r = 2 + 12 * u(rng);
    const Point2 p{r * std::cos(a), 15 + r * std::sin(a)};
    samples.push_back({0.02 * k, p, synthesize_rsrp(scene, p)});
  }
  const auto trace = trace_of(samples);
  const auto grid = GridSpec::covering({0, 0, 30, 30}, 2, 2);
  const std::vector<SsbId> subset{{B, 2, 5}};
  const auto dom = dominance_map(trace, subset, grid);

  const double az5 = cfg.beams[0].boresight_az;
  const double az6 = cfg.beams[1].boresight_az;
  std::vector<double> hits(grid.size(), 0), count(grid.size(), 0);
  for (const auto& s : samples) {
    const double az = std::atan2(s.position.y - 15.0, s.position.x) * 180.0 / std::numbers::pi;
    const std::size_t c = grid.flat(grid.index_of(s.position));
    count[c] += 1;
    if (std::abs(az - az5) <= std::abs(az - az6)) hits[c] += 1;
  }
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (count[c] == 0) {
      EXPECT_FALSE(dom.fraction[c].has_value());
    } else {
      EXPECT_DOUBLE_EQ(*dom.fraction[c], hits[c] / count[c]) << "cell " << c;
    }
  }
}
