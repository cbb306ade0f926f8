#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>

#include "beamfactory/errors.hpp"
#include "beamfactory/switchoff.hpp"
#include "test_support.hpp"

using namespace beamfactory;
using bf_test::burst;
using bf_test::entry;

namespace {

constexpr auto B = TxConfig::B;

MeasurementTrace trace_of(std::vector<MeasurementSample> s) {
  MeasurementTrace t;
  t.config = B;
  t.samples = std::move(s);
  return t;
}

const GridSpec kTwoCells({0, 0}, 1, 1, 2, 1);

// Cell (0,0): bursts {B-1-1 -60, B-1-2 -70}, {B-1-1 -62, B-1-2 -64}
// Cell (1,0): bursts {B-1-2 -65}, {B-1-3 -75, B-1-2 -80}
MeasurementTrace two_cell_fixture() {
  return trace_of({burst(0.00, {0.5, 0.5}, {entry(B, 1, 1, -60), entry(B, 1, 2, -70)}),
                   burst(0.02, {0.5, 0.5}, {entry(B, 1, 1, -62), entry(B, 1, 2, -64)}),
                   burst(0.04, {1.5, 0.5}, {entry(B, 1, 2, -65)}),
                   burst(0.06, {1.5, 0.5}, {entry(B, 1, 2, -80), entry(B, 1, 3, -75)})});
}

BeamMask mask_of(std::initializer_list<std::size_t> on) {
  BeamMask m(27);
  for (auto k : on) m.set(k);
  return m;
}

// Independent objective: straight from the samples with a per-cell map.
double oracle_objective(const MeasurementTrace& t, const GridSpec& g, const BeamMask& m,
                        double floor = -120.0) {
  const auto cfg = make_config(t.config);
  std::map<std::size_t, std::pair<double, double>> cell;  // sum(all-on), sum(set)
  std::map<std::size_t, int> count;
  for (const auto& s : t.samples) {
    if (s.beams.empty() || !g.contains(s.position)) continue;
    double all = floor, set = floor;
    for (const auto& e : s.beams) {
      all = std::max(all, e.rsrp_dbm);
      if (m.test(*cfg.index_of(e.id))) set = std::max(set, e.rsrp_dbm);
    }
    const auto c = g.flat(g.index_of(s.position));
    cell[c].first += all;
    cell[c].second += set;
    count[c] += 1;
  }
  double sum = 0;
  for (const auto& [c, v] : cell) sum += (v.first - v.second) / count[c];
  return sum / static_cast<double>(cell.size());
}

// Random trace whose detections come from `beams` only.
MeasurementTrace random_trace(std::mt19937_64& rng, std::size_t n, const std::vector<std::size_t>& beams) {
  const auto cfg = make_config(B);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MeasurementSample> out;
  for (std::size_t k = 0; k < n; ++k) {
    MeasurementSample s{0.02 * k, {3.999 * u(rng), 2.999 * u(rng)}, {}};
    for (auto b : beams) {
      if (u(rng) < 0.6) s.beams.push_back({cfg.beams[b].id, -115 + 60 * u(rng)});
    }
    out.push_back(std::move(s));
  }
  return trace_of(std::move(out));
}

// Exhaustive oracle over combinations of size <= xi, ties to the lexicographically smallest.
std::pair<BeamMask, double> oracle_best(const MeasurementTrace& t, const GridSpec& g, std::size_t xi) {
  BeamMask best;
  double best_f = 1e300;
  const std::size_t n = 27;
  std::vector<std::size_t> idx;
  const std::function<void(std::size_t)> rec = [&](std::size_t start) {
    if (!idx.empty()) {
      BeamMask m(n);
      for (auto k : idx) m.set(k);
      const double f = oracle_objective(t, g, m);
      if (f < best_f - 1e-9 || (f < best_f + 1e-9 && lexicographically_less(m, best))) {
        best_f = std::min(f, best_f);
        best = m;
      }
    }
    if (idx.size() == xi) return;
    for (std::size_t k = start; k < n; ++k) {
      idx.push_back(k);
      rec(k + 1);
      idx.pop_back();
    }
  };
  rec(0);
  return {best, best_f};
}

}  // namespace

TEST(BeamMask, StringAndOrder) {
  const auto m = BeamMask::parse("0110");
  EXPECT_EQ(m.size(), 4u);
  EXPECT_EQ(m.popcount(), 2u);
  EXPECT_EQ(m.enabled(), (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(m.to_string(), "0110");
  EXPECT_TRUE(lexicographically_less(BeamMask::parse("0110"), BeamMask::parse("1000")));
  EXPECT_FALSE(lexicographically_less(BeamMask::parse("1000"), BeamMask::parse("0111")));
  EXPECT_EQ(BeamMask::all_on(27).popcount(), 27u);
  EXPECT_THROW(BeamMask::parse("01x"), InvalidArgument);
  EXPECT_THROW(BeamMask(65), InvalidArgument);
}

TEST(SwitchOff, FeasibleMaskCounts) {
  EXPECT_EQ(feasible_mask_count(4, 2), 10u);
  EXPECT_EQ(feasible_mask_count(27, 1), 27u);
  EXPECT_EQ(feasible_mask_count(27, 3), 27u + 351u + 2925u);
  EXPECT_EQ(feasible_mask_count(5, 9), 31u);
}

TEST(SwitchOff, SingleCellRsrpMax) {
  const auto t = trace_of({burst(0, {0.5, 0.5}, {entry(B, 1, 1, -60), entry(B, 1, 2, -70)})});
  const auto p = build_problem(t, GridSpec({0, 0}, 1, 1, 1, 1), 1);
  ASSERT_EQ(p.n_cells(), 1u);
  EXPECT_DOUBLE_EQ(p.rsrp_max()[0], -60.0);
  EXPECT_DOUBLE_EQ(*p.beam_mean(0, 1), -70.0);
  EXPECT_FALSE(p.beam_mean(0, 2).has_value());
  EXPECT_EQ(p.n_beams(), 27u);
}

TEST(SwitchOff, CellCountIgnoresOutsideAndEmptyBursts) {
  const auto t = trace_of({burst(0, {0.5, 0.5}, {entry(B, 1, 1, -60)}),
                           burst(1, {1.5, 0.5}, {entry(B, 1, 1, -60)}),
                           burst(2, {2.5, 0.5}, {entry(B, 1, 1, -60)}),
                           burst(3, {2.5, 1.5}, {}),
                           burst(4, {9.5, 0.5}, {entry(B, 1, 1, -60)})});
  const auto p = build_problem(t, GridSpec({0, 0}, 1, 1, 3, 2), 2);
  EXPECT_EQ(p.n_cells(), 3u);
  EXPECT_EQ(p.bursts().size(), 3u);
}

TEST(SwitchOff, BuildErrors) {
  const auto t = two_cell_fixture();
  EXPECT_THROW(build_problem(t, kTwoCells, 0), InvalidArgument);
  EXPECT_THROW(build_problem(trace_of({}), kTwoCells, 1), InvalidArgument);
  EXPECT_THROW(build_problem(t, GridSpec({50, 50}, 1, 1, 2, 2), 1), InvalidArgument);
}

TEST(SwitchOff, TwoCellHandFixture) {
  const auto p = build_problem(two_cell_fixture(), kTwoCells, 2);
  EXPECT_DOUBLE_EQ(p.rsrp_max()[0], -61.0);
  EXPECT_DOUBLE_EQ(p.rsrp_max()[1], -70.0);
  EXPECT_DOUBLE_EQ(objective(p, BeamMask::all_on(27)), 0.0);
  EXPECT_DOUBLE_EQ(objective(p, mask_of({0})), 25.0);
  EXPECT_DOUBLE_EQ(objective(p, mask_of({1})), 4.25);
  EXPECT_DOUBLE_EQ(objective(p, mask_of({0, 1})), 1.25);
  EXPECT_DOUBLE_EQ(objective(p, mask_of({1, 2})), 3.0);
  EXPECT_THROW(objective(p, BeamMask(27)), InvalidArgument);
  EXPECT_THROW(objective(p, BeamMask::all_on(4)), InvalidArgument);

  const auto ex2 = solve_exhaustive(p);
  EXPECT_EQ(ex2.mask, mask_of({0, 1}));
  EXPECT_DOUBLE_EQ(ex2.objective, 1.25);
  EXPECT_EQ(ex2.evaluations, feasible_mask_count(27, 2));
  const auto ex1 = solve_exhaustive(p.with_xi(1));
  EXPECT_EQ(ex1.mask, mask_of({1}));
  EXPECT_DOUBLE_EQ(ex1.objective, 4.25);
}

TEST(SwitchOff, ExhaustiveTieGoesToLexicographicallySmallest) {
  // Only B-1-2 is ever seen; with xi = 2 every pair containing it ties at 0.
  const auto t = trace_of({burst(0, {0.5, 0.5}, {entry(B, 1, 2, -60)})});
  const auto p = build_problem(t, kTwoCells, 2);
  const auto r = solve_exhaustive(p);
  EXPECT_DOUBLE_EQ(r.objective, 0.0);
  EXPECT_EQ(r.mask.to_string(), "010000000000000000000000000");
}

TEST(SwitchOff, ExhaustiveGuard) {
  const auto p = build_problem(two_cell_fixture(), kTwoCells, 3);
  EXPECT_THROW(solve_exhaustive(p, 3000), SearchTooLarge);
  EXPECT_NO_THROW(solve_exhaustive(p, 3303));
  EXPECT_THROW(solve_exhaustive(p.with_xi(10)), SearchTooLarge);
}

// Property: the objective matches the sample-level oracle on random masks and is >= 0.
TEST(SwitchOff, ObjectiveMatchesOracle) {
  std::mt19937_64 rng(1);
  const GridSpec g({0, 0}, 1, 1, 4, 3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto t = random_trace(rng, 200, {0, 3, 5, 11, 12, 20, 26});
    const auto p = build_problem(t, g, 27);
    std::uniform_int_distribution<std::uint64_t> bits(1, (std::uint64_t{1} << 27) - 1);
    for (int k = 0; k < 50; ++k) {
      const BeamMask m(27, bits(rng));
      const double f = objective(p, m);
      EXPECT_NEAR(f, oracle_objective(t, g, m), 1e-9);
      EXPECT_GE(f, 0.0);
    }
  }
}

// Property: exhaustive equals the brute-force oracle and is non-increasing in xi.
TEST(SwitchOff, ExhaustiveMatchesBruteForce) {
  std::mt19937_64 rng(2);
  const GridSpec g({0, 0}, 1, 1, 4, 3);
  for (int trial = 0; trial < 3; ++trial) {
    const auto t = random_trace(rng, 80, {1, 2, 9, 14, 22});
    double last = 1e300;
    for (std::size_t xi = 1; xi <= 3; ++xi) {
      const auto r = solve_exhaustive(build_problem(t, g, xi));
      const auto [mask, f] = oracle_best(t, g, xi);
      EXPECT_NEAR(r.objective, f, 1e-9);
      EXPECT_EQ(r.mask, mask) << r.mask.to_string() << " vs " << mask.to_string();
      EXPECT_LE(r.objective, last + 1e-12);
      last = r.objective;
    }
  }
}

TEST(SwitchOff, GaDeterministicFeasibleAndBoundedBelow) {
  std::mt19937_64 rng(3);
  const GridSpec g({0, 0}, 1, 1, 4, 3);
  const auto t = random_trace(rng, 300, {0, 4, 8, 13, 17, 21, 25});
  for (std::size_t xi = 1; xi <= 3; ++xi) {
    const auto p = build_problem(t, g, xi);
    GaParams params;
    params.pop_size = 40;
    params.generations = 60;
    const auto a = solve_ga(p, params, 11);
    const auto b = solve_ga(p, params, 11);
    EXPECT_EQ(a.mask, b.mask);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_LE(a.mask.popcount(), xi);
    EXPECT_GE(a.mask.popcount(), 1u);
    EXPECT_DOUBLE_EQ(a.objective, objective(p, a.mask));
    const auto ex = solve_exhaustive(p);
    EXPECT_GE(a.objective, ex.objective - 1e-12);
    EXPECT_NEAR(a.objective, ex.objective, 1e-9);
  }
}

TEST(SwitchOff, AllBeamsAllowedIsZero) {
  const auto p = build_problem(two_cell_fixture(), kTwoCells, 27);
  for (const auto& r : {solve_ga(p, GaParams{}, 1), solve_exhaustive(p), solve_exhaustive(p.with_xi(40))}) {
    EXPECT_EQ(r.mask, BeamMask::all_on(27)) << r.solver;
    EXPECT_DOUBLE_EQ(r.objective, 0.0) << r.solver;
  }
}

TEST(SwitchOff, GaParamValidation) {
  GaParams p;
  p.pop_size = 1;
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = GaParams{};
  p.crossover_rate = 1.5;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(SwitchOff, DbscanPicksBothSeparatedGroups) {
  std::vector<MeasurementSample> s;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 60; ++k) {
    s.push_back(burst(0.02 * k, {1 + 0.5 * u(rng), 1 + 0.5 * u(rng)},
                      {entry(B, 1, 1, -60 + u(rng)), entry(B, 2, 2, -80)}));
  }
  for (int k = 60; k < 120; ++k) {
    s.push_back(burst(0.02 * k, {18 + 0.5 * u(rng), 8 + 0.5 * u(rng)},
                      {entry(B, 3, 5, -62 + u(rng)), entry(B, 2, 2, -85)}));
  }
  s.push_back(burst(2.4, {10, 5}, {entry(B, 2, 2, -70)}));
  const auto t = trace_of(s);
  const auto g = GridSpec::covering({0, 0, 20, 10}, 1, 1);
  const auto p = build_problem(t, g, 2);
  const auto r = solve_dbscan(p, DbscanSelectParams{});
  const auto cfg = make_config(B);
  EXPECT_FALSE(r.fallback);
  EXPECT_EQ(r.mask.popcount(), 2u);
  EXPECT_TRUE(r.mask.test(*cfg.index_of({B, 1, 1})));
  EXPECT_TRUE(r.mask.test(*cfg.index_of({B, 3, 5})));
  EXPECT_EQ(r.evaluations, 1u);
  EXPECT_DOUBLE_EQ(r.objective, objective(p, r.mask));

  DbscanSelectParams sparse;
  sparse.min_pts = 1000;
  const auto fb = solve_dbscan(p, sparse);
  EXPECT_TRUE(fb.fallback);
  EXPECT_EQ(fb.mask, r.mask);
  EXPECT_THROW(solve_dbscan(p, DbscanSelectParams{0.0, 8, 0.1}), InvalidArgument);
}
