#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "traffnet/bench/experiment.hpp"
#include "traffnet/bench/metrics.hpp"
#include "traffnet/bench/suite.hpp"
#include "traffnet/common/error.hpp"

using namespace traffnet;
using bench::Forecasts;

namespace {

model::ModelConfig small_model() {
  model::ModelConfig c;
  c.gru_hidden = 4;
  c.gat_hidden = 6;
  c.route_mlp_layers = 2;
  c.route_mlp_hidden = 8;
  c.temporal_hidden = 8;
  c.head_mlp_layers = 2;
  c.seed = 3;
  return c;
}

// One shared small VS-mini run: generation, graph, dataset.
const bench::Experiment& small_experiment() {
  static const bench::Experiment e = [] {
    auto s = gen::vs_mini(5, 140);
    s.events.push_back({s.ods[0].paths[0][2], 105, 115, 0.1});
    return bench::prepare_experiment(s, small_model().forecast);
  }();
  return e;
}

}  // namespace

TEST(HistoricalAverage, Examples) {
  const std::vector<std::vector<double>> h = {{2.0}, {4.0}, {6.0}};
  const auto f = bench::ha_forecast(h, 3);
  ASSERT_EQ(f.size(), 3u);
  for (const auto& row : f) EXPECT_EQ(row, std::vector<double>{4.0});
  const std::vector<std::vector<double>> c(5, std::vector<double>{1.5, 7.0});
  for (const auto& row : bench::ha_forecast(c, 2)) EXPECT_EQ(row, (std::vector<double>{1.5, 7.0}));
  EXPECT_THROW(bench::ha_forecast(std::vector<std::vector<double>>{}, 2), ContractError);
}

TEST(HistoricalAverage, MatchesNaiveMean) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 30.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> h(1 + trial % 7, std::vector<double>(5));
    for (auto& r : h) for (double& x : r) x = u(rng);
    const auto f = bench::ha_forecast(h, 4);
    for (std::size_t i = 0; i < 5; ++i) {
      double s = 0.0;
      for (const auto& r : h) s += r[i];
      const double mean = s / static_cast<double>(h.size());
      for (const auto& row : f) EXPECT_NEAR(row[i], mean, 1e-12);
    }
  }
}

TEST(Metrics, Examples) {
  const std::vector<double> y = {0.0, 0.0}, yhat = {3.0, 4.0};
  const auto m = bench::cell_metrics(y, yhat);
  EXPECT_NEAR(m.rmse, 3.5355339, 1e-6);
  EXPECT_DOUBLE_EQ(m.mae, 3.5);
  const auto z = bench::cell_metrics(yhat, yhat);
  EXPECT_EQ(z.rmse, 0.0);
  EXPECT_EQ(z.mae, 0.0);
  const std::vector<bool> none = {false, false};
  EXPECT_THROW(bench::cell_metrics(y, yhat, &none), ContractError);
  EXPECT_THROW(bench::cell_metrics(y, std::vector<double>{1.0}), ContractError);
}

TEST(Metrics, MaskEqualsRestriction) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::bernoulli_distribution keep(0.4);
  Forecasts y(7, std::vector<std::vector<double>>(3, std::vector<double>(4)));
  Forecasts p = y;
  bench::Mask mask(7, std::vector<std::vector<bool>>(3, std::vector<bool>(4)));
  for (std::size_t s = 0; s < 7; ++s) {
    for (std::size_t h = 0; h < 3; ++h) {
      for (std::size_t i = 0; i < 4; ++i) {
        y[s][h][i] = u(rng);
        p[s][h][i] = u(rng);
        mask[s][h][i] = keep(rng) || i == 0;
      }
    }
  }
  const auto masked = bench::compute_metrics(y, p, &mask);
  for (std::size_t h = 0; h < 3; ++h) {
    std::vector<double> ry, rp;
    for (std::size_t s = 0; s < 7; ++s) {
      for (std::size_t i = 0; i < 4; ++i) {
        if (!mask[s][h][i]) continue;
        ry.push_back(y[s][h][i]);
        rp.push_back(p[s][h][i]);
      }
    }
    const auto direct = bench::cell_metrics(ry, rp);
    EXPECT_DOUBLE_EQ(masked[h].rmse, direct.rmse);
    EXPECT_DOUBLE_EQ(masked[h].mae, direct.mae);
    EXPECT_GE(masked[h].rmse, std::abs(masked[h].mean_error));
    // Cell order does not matter.
    std::vector<std::size_t> perm(ry.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> sy, sp;
    for (std::size_t i : perm) {
      sy.push_back(ry[i]);
      sp.push_back(rp[i]);
    }
    EXPECT_NEAR(bench::cell_metrics(sy, sp).rmse, direct.rmse, 1e-12);
    EXPECT_NEAR(bench::cell_metrics(sy, sp).mae, direct.mae, 1e-12);
  }
}

TEST(RouteShareAccuracy, Examples) {
  const Forecasts truth = {{{0.9, 0.1}, {1.0}}, {{0.2, 0.8}, {1.0}}};
  const auto same = bench::route_share_accuracy(truth, truth);
  EXPECT_DOUBLE_EQ(same.argmax, 1.0);
  EXPECT_DOUBLE_EQ(same.l1, 1.0);

  const Forecasts single = {{{1.0}, {1.0}}};
  EXPECT_DOUBLE_EQ(bench::route_share_accuracy(single, single).argmax, 1.0);

  const auto r = bench::route_share_accuracy({{{0.6, 0.4}}}, {{{0.9, 0.1}}});
  EXPECT_DOUBLE_EQ(r.argmax, 1.0);
  EXPECT_NEAR(r.l1, 0.7, 1e-12);

  const auto wrong = bench::route_share_accuracy({{{0.4, 0.6}}}, {{{0.9, 0.1}}});
  EXPECT_DOUBLE_EQ(wrong.argmax, 0.0);
  EXPECT_THROW(bench::route_share_accuracy({{{}}}, {{{}}}), ContractError);
}

TEST(Pearson, Examples) {
  const std::vector<double> a = {1.0, 3.0, 2.0, 8.0};
  std::vector<double> neg;
  for (double x : a) neg.push_back(-x);
  EXPECT_NEAR(*bench::pearson(a, a), 1.0, 1e-15);
  EXPECT_NEAR(*bench::pearson(a, neg), -1.0, 1e-15);
  EXPECT_FALSE(bench::pearson(a, std::vector<double>(4, 2.0)).has_value());

  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(25), y(25);
    for (std::size_t i = 0; i < 25; ++i) {
      x[i] = n(rng);
      y[i] = 0.3 * x[i] + n(rng);
    }
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < 25; ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      syy += y[i] * y[i];
      sxy += x[i] * y[i];
    }
    const double N = 25.0;
    const double r = (N * sxy - sx * sy) / std::sqrt((N * sxx - sx * sx) * (N * syy - sy * sy));
    EXPECT_NEAR(*bench::pearson(x, y), r, 1e-10);
  }
}

TEST(Pearson, AdjacencyCorrelation) {
  const auto& e = small_experiment();
  const auto corr = bench::adjacency_correlation(e.truth.panel, e.scenario.net);
  EXPECT_EQ(corr.size(), e.scenario.net.edges().size());
  for (const auto& c : corr) {
    EXPECT_TRUE(e.scenario.net.has_edge(c.from, c.to));
    if (c.r) {
      EXPECT_GE(*c.r, -1.0);
      EXPECT_LE(*c.r, 1.0);
    }
  }
  trip::DemandVolumePanel two = e.truth.panel;
  two.volume_series.resize(2);
  two.speed_series.resize(2);
  two.od_series.resize(2);
  EXPECT_THROW(bench::adjacency_correlation(two, e.scenario.net), ContractError);
}

TEST(Experiment, AlignedTruthIsConsistent) {
  const auto& e = small_experiment();
  EXPECT_EQ(e.graph.od_nodes.size(), 5u);
  EXPECT_EQ(e.graph.path_nodes.size(), 12u);
  ASSERT_EQ(e.true_shares.size(), e.truth.panel.num_intervals());
  for (const auto& interval : e.true_shares) {
    for (const auto& od : interval) {
      double s = 0.0;
      for (double x : od) s += x;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
  double a = 0.0, b = 0.0;
  for (const auto& r : e.path_volumes) for (double x : r) a += x;
  for (const auto& r : e.truth.path_volumes) for (double x : r) b += x;
  EXPECT_EQ(a, b);
}

TEST(Suite, HaIsDeterministicAndNeedsNoModel) {
  const auto& e = small_experiment();
  bench::SuiteConfig cfg;
  cfg.model = small_model();
  cfg.variants = {bench::Variant::kHa};
  const auto r1 = bench::run_suite(e.data, cfg, {});
  const auto r2 = bench::run_suite(e.data, cfg, {});
  EXPECT_EQ(bench::report_to_csv(r1), bench::report_to_csv(r2));
  EXPECT_EQ(bench::report_to_json(r1), bench::report_to_json(r2));
  for (std::size_t h = 2; h <= 6; ++h) {
    EXPECT_EQ(r1.row("HA", "all", h).metrics.cells, r1.row("HA", "all", 1).metrics.cells);
  }
  cfg.variants = {bench::Variant::kHa, bench::Variant::kGru};
  EXPECT_THROW(bench::run_suite(e.data, cfg, {}), ContractError);
}

TEST(Suite, GruBaselineLearnsConstantData) {
  const std::size_t nodes = 3, T = 70;
  trip::DemandVolumePanel panel = trip::make_empty_panel(T, nodes, 120.0);
  for (auto& row : panel.volume_series) row = {4.0, 9.0, 2.0};
  for (auto& row : panel.speed_series) row = {10.0, 10.0, 10.0};
  trip::TripGraph graph;
  auto cfg = small_model();
  cfg.forecast.window = 3;
  cfg.forecast.horizon = 2;
  const auto norm = train::Normalizer::fit(panel, graph, 40);
  const train::Dataset data(panel, graph, norm, cfg.forecast);
  model::GruBaseline gru(nodes, cfg);
  const auto starts = data.samples(train::Split::kTest);
  const auto truth = bench::observed(data, starts);
  const double before = bench::compute_metrics(truth, bench::variant_forecasts(bench::Variant::kGru, &gru, data, starts))[0].rmse;
  train::TrainConfig tc;
  tc.adam.lr = 1e-2;
  tc.max_steps = 150;
  train::TrainState st;
  train::offline_train(gru, data, tc, st);
  const double after = bench::compute_metrics(truth, bench::variant_forecasts(bench::Variant::kGru, &gru, data, starts))[0].rmse;
  EXPECT_LT(after, before);
}

TEST(Suite, NoOdForecastIgnoresDemand) {
  const auto& e = small_experiment();
  auto cfg = small_model();
  cfg.no_od = true;
  model::TraffNetModel m(e.scenario.net, e.graph, cfg);
  trip::DemandVolumePanel bumped = e.truth.panel;
  for (auto& row : bumped.od_series) for (auto& [od, d] : row) d = d * 3.0 + 1.0;
  const train::Dataset other(bumped, e.graph, e.normalizer, cfg.forecast, e.truth.affected_mask);
  const auto starts = e.data.samples(train::Split::kTest);
  EXPECT_EQ(train::predict(m, e.data, starts), train::predict(m, other, starts));
}

TEST(Suite, FullTableOnVsMini) {
  const auto& e = small_experiment();
  bench::SuiteConfig cfg;
  cfg.model = small_model();
  cfg.train.max_steps = 2;
  cfg.pretrain.epochs = 1;
  std::vector<bench::VariantModel> trained;
  std::map<bench::Variant, const model::Forecaster*> models;
  for (const auto v : bench::all_variants()) {
    if (!bench::trainable(v)) continue;
    trained.push_back(bench::train_variant(v, e.inputs(), e.data, cfg));
    models[v] = trained.back().model.get();
  }
  const auto report = bench::run_suite(e.data, cfg, models, e.true_shares, "vs-mini");
  for (const auto v : bench::all_variants()) {
    for (std::size_t h = 1; h <= 6; ++h) {
      const auto& row = report.row(bench::variant_name(v), "all", h);
      EXPECT_TRUE(std::isfinite(row.metrics.rmse));
      EXPECT_TRUE(std::isfinite(row.metrics.mae));
      EXPECT_GE(row.metrics.rmse, std::abs(row.metrics.mean_error) - 1e-12);
    }
  }
  std::size_t affected = 0;
  for (const auto& r : report.rows) affected += r.subset == "affected";
  EXPECT_GT(affected, 0u);
  ASSERT_TRUE(report.route_accuracy.has_value());
  EXPECT_GE(report.route_accuracy->argmax, 0.0);
  EXPECT_LE(report.route_accuracy->argmax, 1.0);
  const auto csv = bench::report_to_csv(report);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(report.rows.size() + 1));
  EXPECT_GE(report.rows.size(), 30u);
}
