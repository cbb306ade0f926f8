#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "beamfactory/errors.hpp"
#include "beamfactory/link.hpp"
#include "beamfactory/trace_io.hpp"
#include "test_support.hpp"

using namespace beamfactory;
using bf_test::entry;
using bf_test::single_hall;

namespace {

BeamGridConfig one_beam(double az = 0.0, double downtilt = 0.0) {
  BeamGridConfig cfg;
  cfg.config = TxConfig::B;
  Beam b;
  b.id = {TxConfig::B, 2, 1};
  b.boresight_az = az;
  b.boresight_downtilt = downtilt;
  cfg.beams = {b};
  cfg.row_counts = {10, 10, 7};
  cfg.downtilts = {-7.0, 0.0, 8.0};
  cfg.az_min = -75.0;
  cfg.az_max = 75.0;
  return cfg;
}

struct Scene {
  FactoryLayout layout;
  BeamGridConfig beams;
  PathGainModel los;
  PathGainModel nlos;
  ShadowingField shadowing;
  LinkBudget budget;

  SceneView view() const { return {layout, beams, los, nlos, shadowing, budget}; }
};

Scene los_corridor(PathGainModel los = {-58.8, 2.29, 0.0}) {
  return Scene{single_hall({0, -10, 30, 10}, {0, 0, 1.5}, Visibility::LoS), one_beam(), los,
               {-39.6, 4.4, 0.0}, ShadowingField::covering({0, -10, 30, 10}, 0.0, 10.0, 0),
               LinkBudget{}};
}

RouteSpec straight(double x0, double x1, double speed = 1.5) {
  return {"r", {{x0, 0.0}, {x1, 0.0}}, speed, 0.02};
}

}  // namespace

TEST(Link, BudgetConstants) {
  const LinkBudget b;
  EXPECT_EQ(b.n_re(), 792);
  EXPECT_NEAR(tx_power_per_re(b), 21.2 - 10.0 * std::log10(792.0), 1e-12);
  EXPECT_NEAR(tx_power_per_re(b), -7.79, 0.005);
  EXPECT_EQ(b.numerology(), 3);
  EXPECT_DOUBLE_EQ(b.noise_floor, -120.0);
  const SsbTiming t;
  EXPECT_DOUBLE_EQ(t.burst_periodicity, 0.020);
  EXPECT_DOUBLE_EQ(t.burst_duration, 0.005);
  EXPECT_NEAR(t.symbol_duration, 8.91e-6, 1e-12);
}

TEST(Link, BudgetValidation) {
  LinkBudget b;
  b.scs = 100e3;
  EXPECT_THROW(b.validate(), InvalidArgument);
  b = LinkBudget{};
  b.n_rb = 0;
  EXPECT_THROW(b.validate(), InvalidArgument);
  SsbTiming t;
  t.burst_duration = 0.03;
  EXPECT_THROW(t.validate(), InvalidArgument);
}

TEST(Link, RsrpFromPathGainExample) {
  const auto s = los_corridor();
  const auto out = synthesize_rsrp(s.view(), {10.0, 0.0});
  ASSERT_EQ(out.size(), 1u);
  const auto terms = link_terms(s.view(), {10.0, 0.0});
  EXPECT_NEAR(terms.pg_mean, -81.7, 1e-12);
  EXPECT_NEAR(out[0].rsrp_dbm, -81.7 + tx_power_per_re(s.budget) + 27.0 - 1.0, 1e-9);
  EXPECT_NEAR(out[0].rsrp_dbm, -63.49, 0.005);
}

TEST(Link, BeamBelowNoiseFloorIsOmitted) {
  auto s = los_corridor();
  // 60 deg off boresight the pattern sits on its 30 dB floor.
  s.beams = one_beam(60.0);
  const auto out = synthesize_rsrp(s.view(), {10.0, 0.0}, -40.0);
  const double expected = -81.7 - 40.0 + tx_power_per_re(s.budget) + (27.0 - 30.0) - 1.0;
  ASSERT_LT(expected, -120.0);
  EXPECT_TRUE(out.empty());
  s.budget.noise_floor = -140.0;
  const auto kept = synthesize_rsrp(s.view(), {10.0, 0.0}, -40.0);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_NEAR(kept[0].rsrp_dbm, expected, 1e-9);
}

TEST(Link, ReceiverGainShiftsExtraction) {
  auto s = los_corridor();
  s.budget.g_rx = 2.0;
  const auto out = synthesize_rsrp(s.view(), {10.0, 0.0});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_NEAR(out[0].rsrp_dbm, -61.49, 0.005);
  EXPECT_NEAR(extract_path_gain(out[0], {10.0, 0.0}, s.budget, s.beams, s.layout), -81.7, 1e-9);
  LinkBudget ignoring = s.budget;
  ignoring.g_rx = 0.0;
  EXPECT_NEAR(extract_path_gain(out[0], {10.0, 0.0}, ignoring, s.beams, s.layout), -79.7, 1e-9);
}

TEST(Link, ExtractRejectsForeignBeam) {
  const auto s = los_corridor();
  const BeamRsrp foreign{{TxConfig::B, 3, 4}, -70.0};
  EXPECT_THROW(extract_path_gain(foreign, {10, 0}, s.budget, s.beams, s.layout), InvalidArgument);
}

// Property: extraction inverts synthesis for every reported beam, both visibility classes.
TEST(Link, ExtractionRoundTripRandomLinks) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto cfg = make_config(TxConfig::B);
  for (auto vis : {Visibility::LoS, Visibility::NLoS}) {
    const auto layout = single_hall({0, 0, 40, 30}, {0.5, 15, 3}, vis);
    const PathGainModel los{-58.8, 2.29, 4.6};
    const PathGainModel nlos{-39.6, 4.4, 5.8};
    const auto field = ShadowingField::covering({0, 0, 40, 30}, 1.0, 10.0, 7);
    LinkBudget budget;
    budget.g_rx = 3.0 * u(rng);
    budget.noise_floor = -200.0;
    const SceneView scene{layout, cfg, los, nlos, field, budget};
    for (int k = 0; k < 500; ++k) {
      const Point2 p{2 + 37 * u(rng), 29 * u(rng)};
      const double fading = 8 * u(rng) - 4;
      const auto terms = link_terms(scene, p);
      for (const auto& e : synthesize_rsrp(scene, p, fading)) {
        EXPECT_NEAR(extract_path_gain(e, p, budget, cfg, layout), terms.path_gain() + fading, 1e-9);
      }
    }
  }
}

TEST(Link, DopplerExamples) {
  EXPECT_NEAR(doppler_shift(1.5, 26e9), 130.1, 0.05);
  EXPECT_LT(doppler_shift(2.0, 26e9) / 120e3, 0.002);
  EXPECT_THROW(doppler_shift(-1.0, 26e9), InvalidArgument);
}

TEST(Link, RsrpMonotoneAlongBoresight) {
  const auto s = los_corridor();
  double last = 1e9;
  for (double x = 1.0; x <= 29.0; x += 0.25) {
    const auto out = synthesize_rsrp(s.view(), {x, 0.0});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_LT(out[0].rsrp_dbm, last);
    last = out[0].rsrp_dbm;
  }
}

TEST(Link, StrongestEntryTieBreak) {
  MeasurementSample s{0, {}, {entry(TxConfig::B, 1, 2, -70), entry(TxConfig::B, 2, 1, -70),
                              entry(TxConfig::B, 3, 1, -75)}};
  EXPECT_EQ(strongest_entry(s), 0u);
  s.beams[1].rsrp_dbm = -69.9;
  EXPECT_EQ(strongest_entry(s), 1u);
  EXPECT_EQ(strongest_entry(MeasurementSample{}), std::nullopt);
}

TEST(Campaign, TimestampsAreBurstMultiples) {
  const auto s = los_corridor();
  const std::vector<RouteSpec> routes{straight(1, 4), straight(4, 2)};
  const auto trace = run_campaign(s.view(), routes, SsbTiming{}, {});
  ASSERT_FALSE(trace.empty());
  for (std::size_t k = 0; k < trace.samples.size(); ++k) {
    EXPECT_DOUBLE_EQ(trace.samples[k].time, static_cast<double>(k) * 0.020);
  }
  EXPECT_EQ(trace.meta.route_name, "r+r");
  EXPECT_EQ(trace.config, TxConfig::B);
}

TEST(Campaign, DeterministicAndWorkerIndependent) {
  const auto layout = single_hall({0, 0, 40, 30}, {0.5, 15, 3}, Visibility::NLoS);
  const auto cfg = make_config(TxConfig::B);
  const PathGainModel los{-58.8, 2.29, 4.6};
  const PathGainModel nlos{-39.6, 4.4, 5.8};
  const auto field = ShadowingField::covering({0, 0, 40, 30}, 1.0, 10.0, 11);
  const LinkBudget budget;
  const SceneView scene{layout, cfg, los, nlos, field, budget};
  const std::vector<RouteSpec> routes{{"zig", {{2, 2}, {38, 2}, {38, 28}, {2, 28}}, 1.5, 0.02}};
  CampaignOptions opt;
  opt.seed = 9;
  opt.fading_sigma = 3.0;
  const auto a = run_campaign(scene, routes, SsbTiming{}, opt);
  opt.workers = 4;
  const auto b = run_campaign(scene, routes, SsbTiming{}, opt);
  opt.seed = 10;
  const auto c = run_campaign(scene, routes, SsbTiming{}, opt);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_NE(a.samples, c.samples);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a);
  write_trace_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Campaign, RouteLeavingLayoutIsNamed) {
  const auto s = los_corridor();
  const std::vector<RouteSpec> routes{{"escape", {{5, 0}, {35, 0}}, 1.5, 0.02}};
  try {
    run_campaign(s.view(), routes, SsbTiming{}, {});
    FAIL() << "expected OutOfLayoutError";
  } catch (const OutOfLayoutError& e) {
    EXPECT_NE(std::string(e.what()).find("escape"), std::string::npos);
  }
}

TEST(Campaign, FadingIsPerBurstAndShared) {
  auto s = los_corridor();
  s.beams = make_config(TxConfig::B);
  s.budget.noise_floor = -300.0;
  const std::vector<RouteSpec> routes{straight(5, 6)};
  CampaignOptions opt;
  opt.fading_sigma = 4.0;
  opt.seed = 3;
  const auto faded = run_campaign(s.view(), routes, SsbTiming{}, opt);
  const auto clean = run_campaign(s.view(), routes, SsbTiming{}, {});
  ASSERT_EQ(faded.samples.size(), clean.samples.size());
  for (std::size_t k = 0; k < faded.samples.size(); ++k) {
    const auto& f = faded.samples[k].beams;
    const auto& c = clean.samples[k].beams;
    ASSERT_EQ(f.size(), c.size());
    const double shift = f[0].rsrp_dbm - c[0].rsrp_dbm;
    for (std::size_t b = 0; b < f.size(); ++b) EXPECT_NEAR(f[b].rsrp_dbm - c[b].rsrp_dbm, shift, 1e-9);
  }
}

TEST(TraceIo, RoundTripAtFileResolution) {
  MeasurementTrace t;
  t.config = TxConfig::B;
  t.samples = {{0.0, {1.25, 2.5}, {entry(TxConfig::B, 1, 2, -70.25), entry(TxConfig::B, 3, 4, -81.5)}},
               {0.02, {1.28, 2.5}, {entry(TxConfig::B, 2, 1, -65.0)}}};
  std::stringstream ss;
  write_trace_csv(ss, t);
  EXPECT_EQ(ss.str().substr(0, kTraceCsvHeader.size()), kTraceCsvHeader);
  const auto back = read_trace_csv(ss);
  EXPECT_EQ(back.config, TxConfig::B);
  EXPECT_EQ(back.samples, t.samples);
}

TEST(TraceIo, ErrorsCarryLineNumbers) {
  const auto expect_line = [](const std::string& body, const std::string& where) {
    std::istringstream in(std::string(kTraceCsvHeader) + "\n" + body);
    try {
      read_trace_csv(in);
      ADD_FAILURE() << "no error for: " << body;
    } catch (const ConfigError& e) {
      EXPECT_EQ(e.where(), where) << e.what();
    }
  };
  expect_line("0.0,1,2,B,1,1,-70\n0.0,1,2,B,1,x,-71\n", "line 3");
  expect_line("0.0,1,2,B,1,1,-70\n0.0,1,2,A,1,2,-71\n", "line 3");
  expect_line("0.0,1,2,B,4,1,-70\n", "line 2");
  expect_line("0.0,1,2,B,1,1,-70\n0.0,1,2,B,1,1,-71\n", "line 3");
  expect_line("0.0,1,2,B,1,1\n", "line 2");
  std::istringstream bad_header("time,x,y\n");
  EXPECT_THROW(read_trace_csv(bad_header), ConfigError);
}
