#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/random_trips.hpp"
#include "../support/toy.hpp"
#include "traffnet/autodiff/gradcheck.hpp"
#include "traffnet/common/error.hpp"
#include "traffnet/model/forecaster.hpp"

namespace tn = traffnet;
using tn::ad::Tape;
using tn::ad::Tensor;
using tn::ad::Var;
using tn::model::ModelConfig;
using tn::model::ParamBinder;
using tn::model::ParamStore;

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void fill(ParamStore& store, const std::string& name, std::vector<double> values) {
  auto v = store.get(name).value.values();
  ASSERT_EQ(v.size(), values.size()) << name;
  std::copy(values.begin(), values.end(), v.begin());
}

void fill_prefix(ParamStore& store, const std::string& prefix, double value) {
  for (auto* p : store.list(prefix)) {
    for (double& x : p->value.values()) x = value;
  }
}

// Reference GRU with plain loops. w: [3h][in], u_zr: [2h][h], u_h: [h][h], b: [3h].
struct RefGru {
  std::size_t in, h;
  std::vector<double> w, u_zr, u_h, b;

  std::vector<double> step(const std::vector<double>& x, const std::vector<double>& prev) const {
    std::vector<double> z(h), r(h), c(h), out(h);
    for (std::size_t i = 0; i < h; ++i) {
      double az = b[i], ar = b[h + i];
      for (std::size_t j = 0; j < in; ++j) {
        az += w[i * in + j] * x[j];
        ar += w[(h + i) * in + j] * x[j];
      }
      for (std::size_t j = 0; j < h; ++j) {
        az += u_zr[i * h + j] * prev[j];
        ar += u_zr[(h + i) * h + j] * prev[j];
      }
      z[i] = sigmoid(az);
      r[i] = sigmoid(ar);
    }
    for (std::size_t i = 0; i < h; ++i) {
      double ac = b[2 * h + i];
      for (std::size_t j = 0; j < in; ++j) ac += w[(2 * h + i) * in + j] * x[j];
      for (std::size_t j = 0; j < h; ++j) ac += u_h[i * h + j] * r[j] * prev[j];
      c[i] = std::tanh(ac);
      out[i] = (1.0 - z[i]) * prev[i] + z[i] * c[i];
    }
    return out;
  }
};

std::vector<double> seq(std::size_t n, double start, double step) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = start + step * static_cast<double>(i);
  return v;
}

void load_gru(ParamStore& store, const std::string& name, const RefGru& g) {
  fill(store, name + ".input_weight", g.w);
  fill(store, name + ".gate_weight", g.u_zr);
  fill(store, name + ".cand_weight", g.u_h);
  fill(store, name + ".bias", g.b);
}

RefGru patterned_gru(std::size_t in, std::size_t h, double offset) {
  RefGru g{in, h, {}, {}, {}, {}};
  g.w = seq(3 * h * in, -0.4 + offset, 0.13);
  g.u_zr = seq(2 * h * h, 0.3 - offset, -0.11);
  g.u_h = seq(h * h, -0.2, 0.17);
  g.b = seq(3 * h, 0.05, -0.07);
  return g;
}

struct Toy {
  tn::trip::RoadNetwork net = tn::testing::complete_network(5);
  tn::trip::TripGraph graph = tn::testing::toy_graph(net);
};

}  // namespace

TEST(GruCell, ScalarHandEvaluation) {
  ParamStore store;
  std::mt19937_64 rng(1);
  const auto cell = tn::model::GruCell::create(store, "c", 1, 1, rng);
  fill_prefix(store, "c.", 1.0);
  fill(store, "c.bias", {0.0, 0.0, 0.0});
  Tape tape;
  ParamBinder bind(tape);
  const Var h = cell(bind, tape.constant(Tensor::vector({1.0})), tape.constant(Tensor::vector({0.0})));
  const double z = sigmoid(1.0);
  EXPECT_NEAR(z, 0.7311, 1e-4);
  EXPECT_NEAR(h.item(), z * std::tanh(1.0), 1e-15);
  EXPECT_NEAR(h.item(), 0.5568, 1e-3);
}

TEST(GruCell, MatchesReferenceLoop) {
  ParamStore store;
  std::mt19937_64 rng(1);
  const auto cell = tn::model::GruCell::create(store, "c", 3, 2, rng);
  const RefGru ref = patterned_gru(3, 2, 0.0);
  load_gru(store, "c", ref);
  Tape tape;
  ParamBinder bind(tape);
  const std::vector<double> x{0.5, -1.0, 2.0}, h0{0.1, -0.3};
  const Var h = cell(bind, tape.constant(Tensor::vector(x)), tape.constant(Tensor::vector(h0)));
  const auto expected = ref.step(x, h0);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(h.value()[i], expected[i], 1e-14);
}

TEST(CausalEncoder, ZeroWeightsGiveZeroPathEmbedding) {
  Toy toy;
  ModelConfig c = tn::testing::tiny_config();
  tn::model::TraffNetModel model(toy.net, toy.graph, c);
  fill_prefix(model.params(), "causal.path_gru", 0.0);
  std::mt19937_64 rng(3);
  const auto f = tn::testing::random_features(rng, 5, 2);
  Tape tape;
  ParamBinder bind(tape);
  std::vector<Var> segs;
  for (auto n : toy.graph.path_nodes[0].segment_seq) {
    segs.push_back(model.causal().segment_input(bind, n, f));
  }
  const auto emb = model.causal().embed_path(bind, segs);
  for (const auto& h : emb.per_segment) {
    for (double v : h.value().values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(CausalEncoder, PaddingTailIsZero) {
  Toy toy;
  ModelConfig c = tn::testing::tiny_config();
  c.max_path_length = 4;
  tn::model::TraffNetModel model(toy.net, toy.graph, c);
  std::mt19937_64 rng(3);
  const auto f = tn::testing::random_features(rng, 5, 2);
  Tape tape;
  ParamBinder bind(tape);
  std::vector<Var> segs{model.causal().segment_input(bind, 1, f),
                        model.causal().segment_input(bind, 4, f)};
  const auto emb = model.causal().embed_path(bind, segs);
  const std::size_t n = model.causal().embedding_width();
  ASSERT_EQ(emb.per_segment.size(), 2u);
  ASSERT_EQ(emb.concatenated.size(), 4 * n);
  EXPECT_EQ(emb.mask, (std::vector<bool>{true, true, false, false}));
  const auto v = emb.concatenated.value().values();
  for (std::size_t i = 2 * n; i < 4 * n; ++i) EXPECT_EQ(v[i], 0.0);
  for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(v[i], emb.per_segment[0].value()[i]);
}

TEST(CausalEncoder, OverlongPathIsCapacityError) {
  Toy toy;
  tn::model::TraffNetModel model(toy.net, toy.graph, tn::testing::tiny_config());
  std::mt19937_64 rng(3);
  const auto f = tn::testing::random_features(rng, 5, 2);
  Tape tape;
  ParamBinder bind(tape);
  std::vector<Var> segs(4, model.causal().segment_input(bind, 0, f));
  try {
    model.causal().embed_path(bind, segs, 17);
    FAIL();
  } catch (const tn::CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("path 17"), std::string::npos);
  }
}

TEST(CausalEncoder, SegmentInputLayout) {
  Toy toy;
  ModelConfig c = tn::testing::tiny_config();
  tn::model::IntervalFeatures f{{1.0, 1.0}, {1, 2, 3, 4, 5}, {6, 7, 8, 9, 10}};
  {
    tn::model::TraffNetModel model(toy.net, toy.graph, c);
    Tape tape;
    ParamBinder bind(tape);
    const auto v = model.causal().segment_input(bind, 2, f).value().values();
    ASSERT_EQ(v.size(), 10u);
    EXPECT_EQ(std::count(v.begin(), v.begin() + 5, 1.0), 1);
    EXPECT_EQ(v[2], 1.0);
    EXPECT_EQ(v[8], 3.0);
    EXPECT_EQ(v[9], 8.0);
  }
  c.no_tf = true;
  tn::model::TraffNetModel model(toy.net, toy.graph, c);
  Tape tape;
  ParamBinder bind(tape);
  const auto v = model.causal().segment_input(bind, 2, f).value().values();
  EXPECT_EQ(v[8], 0.0);
  EXPECT_EQ(v[9], 0.0);
}

namespace {

// Single-segment paths so that padded embeddings are 2-vectors.
struct AttentionToy {
  tn::trip::RoadNetwork net = tn::testing::complete_network(3);
  tn::trip::TripGraph graph;
  AttentionToy() {
    graph.od_nodes.push_back({0, 0, 1});
    graph.path_nodes.push_back({0, 0, {0}});
    graph.path_nodes.push_back({1, 0, {1}});
    graph.edges_r = {{0, 0}, {0, 1}};
    graph.edges_rprime = {{0, 0, 1}, {1, 1, 1}};
  }
  ModelConfig config() const {
    ModelConfig c = tn::testing::tiny_config();
    c.gru_hidden = 1;
    c.max_path_length = 1;
    c.gat_hidden = 1;
    c.gat_heads = 1;
    c.route_skip = false;
    return c;
  }
};

}  // namespace

TEST(MetaPathAttention, SingletonAndSymmetry) {
  AttentionToy toy;
  tn::model::TraffNetModel model(toy.net, toy.graph, toy.config());
  Tape tape;
  ParamBinder bind(tape);
  const Var h1 = tape.constant(Tensor::vector({0.3, -0.7}));
  const auto single = model.causal().meta_path_attention(bind, std::vector<Var>{h1});
  ASSERT_EQ(single.alpha.size(), 1u);
  EXPECT_EQ(single.alpha[0].item(), 1.0);
  const auto& wv = model.params().get("causal.gat.h0.W_value").value;
  EXPECT_NEAR(single.attended[0].item(), wv[0] * 0.3 + wv[1] * -0.7, 1e-15);

  const auto pair = model.causal().meta_path_attention(bind, std::vector<Var>{h1, h1});
  for (const auto& a : pair.alpha) {
    EXPECT_EQ(a.value()[0], 0.5);
    EXPECT_EQ(a.value()[1], 0.5);
  }
}

TEST(MetaPathAttention, DirectFormula) {
  AttentionToy toy;
  tn::model::TraffNetModel model(toy.net, toy.graph, toy.config());
  const double w[2] = {0.5, -0.3}, wv[2] = {0.2, 0.7}, a[2] = {0.4, -0.6};
  fill(model.params(), "causal.gat.h0.W", {w[0], w[1]});
  fill(model.params(), "causal.gat.h0.W_value", {wv[0], wv[1]});
  fill(model.params(), "causal.gat.h0.a", {a[0], a[1]});
  const double h[2][2] = {{1.0, 2.0}, {-1.0, 0.5}};
  Tape tape;
  ParamBinder bind(tape);
  std::vector<Var> hs{tape.constant(Tensor::vector({h[0][0], h[0][1]})),
                      tape.constant(Tensor::vector({h[1][0], h[1][1]}))};
  const auto out = model.causal().meta_path_attention(bind, hs);

  auto leaky = [](double x) { return x > 0 ? x : 0.01 * x; };
  const double k[2] = {w[0] * h[0][0] + w[1] * h[0][1], w[0] * h[1][0] + w[1] * h[1][1]};
  const double v[2] = {wv[0] * h[0][0] + wv[1] * h[0][1], wv[0] * h[1][0] + wv[1] * h[1][1]};
  for (int j = 0; j < 2; ++j) {
    const double e0 = std::exp(leaky(a[0] * k[j] + a[1] * k[0]));
    const double e1 = std::exp(leaky(a[0] * k[j] + a[1] * k[1]));
    const double a0 = e0 / (e0 + e1), a1 = e1 / (e0 + e1);
    EXPECT_NEAR(out.alpha[j].value()[0], a0, 1e-14);
    EXPECT_NEAR(out.alpha[j].value()[1], a1, 1e-14);
    EXPECT_NEAR(out.attended[j].item(), a0 * v[0] + a1 * v[1], 1e-14);
  }
}

TEST(RoutePreferences, SoftmaxOfScores) {
  AttentionToy toy;
  ModelConfig c = toy.config();
  c.route_mlp_layers = 1;
  tn::model::TraffNetModel model(toy.net, toy.graph, c);
  // Score = x with weight 1, bias 0 on a 1-wide attended vector.
  fill(model.params(), "causal.route_mlp.l0.weight", {1.0});
  fill(model.params(), "causal.route_mlp.l0.bias", {0.0});
  Tape tape;
  ParamBinder bind(tape);
  const Var s1 = tape.constant(Tensor::vector({std::log(2.0)}));
  const Var s2 = tape.constant(Tensor::vector({0.0}));
  const Var co = model.causal().route_preferences(bind, std::vector<Var>{s1, s2});
  EXPECT_NEAR(co.value()[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(co.value()[1], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(model.causal().route_preferences(bind, std::vector<Var>{s1}).item(), 1.0);
  const Var eq = model.causal().route_preferences(bind, std::vector<Var>{s2, s2, s2});
  for (double v : eq.value().values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
}

TEST(OdAssignment, ScalingExamples) {
  Tape tape;
  const Var h = tape.constant(Tensor::vector({1.0, 2.0}));
  const Var co = tape.constant(Tensor::vector({0.4}));
  const Var out = tn::model::apply_od_assignment(h, co, 5.0);
  EXPECT_NEAR(out.value()[0], 2.0, 1e-15);
  EXPECT_NEAR(out.value()[1], 4.0, 1e-15);
  const Var zero = tn::model::apply_od_assignment(h, co, 0.0);
  EXPECT_EQ(zero.value()[0], 0.0);
  EXPECT_EQ(zero.value()[1], 0.0);
  EXPECT_THROW(tn::model::apply_od_assignment(h, co, -1.0), tn::ValidationError);
}

TEST(OdAssignment, Homogeneity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0), m(0.0, 10.0), s(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Tape tape;
    std::vector<double> v(6);
    for (double& x : v) x = u(rng);
    const Var h = tape.constant(Tensor::vector(v));
    const Var co = tape.constant(Tensor::vector({s(rng)}));
    const double d = m(rng);
    const auto a = tn::model::apply_od_assignment(h, co, d).value();
    const auto b = tn::model::apply_od_assignment(h, co, 2.0 * d).value();
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(b[i], 2.0 * a[i]);
  }
}

TEST(SegmentEmbeddings, SingleEdgeAndEmpty) {
  tn::trip::RoadNetwork net = tn::testing::complete_network(4);
  tn::trip::TripGraph g;
  g.od_nodes.push_back({0, 0, 2});
  g.path_nodes.push_back({0, 0, {0, 1, 2}});
  g.edges_r = {{0, 0}};
  g.edges_rprime = {{0, 0, 1}, {0, 1, 2}, {0, 2, 3}};
  ModelConfig c = tn::testing::tiny_config();
  c.gru_hidden = 1;  // not used for n below; n = 2
  tn::model::TraffNetModel model(net, g, c);
  Tape tape;
  ParamBinder bind(tape);
  const Var h = tape.constant(Tensor::vector({1, 2, 3, 4, 5, 6}));
  const auto seg = model.causal().segment_embeddings(bind, std::vector<Var>{h});
  EXPECT_EQ(seg[1].value().values()[0], 3.0);
  EXPECT_EQ(seg[1].value().values()[1], 4.0);
  EXPECT_EQ(seg[3].value().values()[0], 0.0);
  EXPECT_EQ(seg[3].value().values()[1], 0.0);
}

TEST(SegmentEmbeddings, OrderBeyondMaxIsIntegrityError) {
  tn::trip::RoadNetwork net = tn::testing::complete_network(4);
  tn::trip::TripGraph g;
  g.od_nodes.push_back({0, 0, 2});
  g.path_nodes.push_back({0, 0, {0, 1, 2}});
  g.edges_r = {{0, 0}};
  g.edges_rprime = {{0, 0, 1}, {0, 1, 2}, {0, 2, 3}};
  ModelConfig c = tn::testing::tiny_config();
  c.max_path_length = 2;
  EXPECT_THROW(tn::model::TraffNetModel(net, g, c), tn::ValidationError);
}

TEST(SegmentEmbeddings, MatchesBruteForceOnRandomGraphs) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nodes = 4 + trial % 9;  // up to 12 segments
    const auto net = tn::testing::complete_network(nodes);
    auto trips = tn::testing::random_trips(rng, 8, nodes, 5, 120.0, 2);
    const auto g = tn::trip::build_trip_graph(trips, net, {.min_support = 1});
    ASSERT_LE(g.path_nodes.size(), 8u);
    ModelConfig c = tn::testing::tiny_config();
    tn::model::TraffNetModel model(net, g, c);
    const std::size_t n = model.causal().embedding_width();
    const std::size_t width = model.causal().padded_width();
    std::normal_distribution<double> z(0.0, 1.0);
    Tape tape;
    ParamBinder bind(tape);
    std::vector<std::vector<double>> raw(g.path_nodes.size(), std::vector<double>(width));
    std::vector<Var> assigned;
    for (auto& r : raw) {
      for (double& x : r) x = z(rng);
      assigned.push_back(tape.constant(Tensor::vector(r)));
    }
    const auto seg = model.causal().segment_embeddings(bind, assigned);
    ASSERT_EQ(seg.size(), nodes);
    for (std::size_t node = 0; node < nodes; ++node) {
      std::vector<double> expect(n, 0.0);
      bool first = true;
      for (std::size_t j = 0; j < g.path_nodes.size(); ++j) {
        const auto& s = g.path_nodes[j].segment_seq;
        for (std::size_t k = 0; k < s.size(); ++k) {
          if (s[k] != node) continue;
          for (std::size_t i = 0; i < n; ++i) {
            expect[i] = first ? raw[j][k * n + i] : expect[i] + raw[j][k * n + i];
          }
          first = false;
        }
      }
      for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seg[node].value()[i], expect[i]);
    }
  }
}

TEST(CausalEncoder, ConservationOnToy) {
  Toy toy;
  tn::model::TraffNetModel model(toy.net, toy.graph, tn::testing::tiny_config());
  std::mt19937_64 rng(9);
  const auto f = tn::testing::random_features(rng, 5, 2);
  Tape tape;
  ParamBinder bind(tape);
  const auto out = model.causal().forward(bind, f);
  ASSERT_EQ(out.route_shares.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    double sum = 0.0, assigned = 0.0;
    for (double v : out.route_shares[k].value().values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
      assigned += f.demand[k] * v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_NEAR(assigned, f.demand[k], 1e-6 * f.demand[k]);
    for (const auto& a : out.alpha[k]) {
      double s = 0.0;
      for (double v : a.value().values()) s += v;
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
  EXPECT_EQ(out.segment_embeddings.size(), 5 * model.causal().embedding_width());
}

TEST(TraffNetModel, NoOdIsInvariantToDemand) {
  Toy toy;
  ModelConfig c = tn::testing::tiny_config();
  c.no_od = true;
  tn::model::TraffNetModel model(toy.net, toy.graph, c);
  std::mt19937_64 rng(4);
  std::vector<tn::model::IntervalFeatures> a, b;
  for (int t = 0; t < 2; ++t) {
    a.push_back(tn::testing::random_features(rng, 5, 2));
    b.push_back(a.back());
    b.back().demand = {7.5, 0.01};
  }
  auto run = [&](const std::vector<tn::model::IntervalFeatures>& w) {
    Tape tape(false);
    ParamBinder bind(tape);
    std::vector<const tn::model::IntervalFeatures*> ptrs{&w[0], &w[1]};
    std::vector<std::vector<double>> out;
    for (const auto& y : model.forward(bind, ptrs)) {
      out.emplace_back(y.value().values().begin(), y.value().values().end());
    }
    return out;
  };
  EXPECT_EQ(run(a), run(b));
}

TEST(TraffNetModel, DemandChangesPredictions) {
  Toy toy;
  tn::model::TraffNetModel model(toy.net, toy.graph, tn::testing::tiny_config());
  std::mt19937_64 rng(4);
  auto f1 = tn::testing::random_features(rng, 5, 2);
  auto f2 = f1;
  f2.demand[0] *= 3.0;
  Tape tape;
  ParamBinder bind(tape);
  const auto a = model.causal().forward(bind, f1).segment_embeddings.value();
  const auto b = model.causal().forward(bind, f2).segment_embeddings.value();
  EXPECT_NE(a, b);
}

TEST(TraffNetModel, OutputShapeNonnegativeDeterministic) {
  Toy toy;
  const ModelConfig c = tn::testing::tiny_config();
  tn::model::TraffNetModel m1(toy.net, toy.graph, c), m2(toy.net, toy.graph, c);
  EXPECT_TRUE(m1.params() == m2.params());
  std::mt19937_64 rng(8);
  std::vector<tn::model::IntervalFeatures> w{tn::testing::random_features(rng, 5, 2),
                                             tn::testing::random_features(rng, 5, 2)};
  std::vector<const tn::model::IntervalFeatures*> ptrs{&w[0], &w[1]};
  Tape t1, t2;
  ParamBinder b1(t1), b2(t2);
  const auto y1 = m1.forward(b1, ptrs);
  const auto y2 = m2.forward(b2, ptrs);
  ASSERT_EQ(y1.size(), c.forecast.horizon);
  for (std::size_t l = 0; l < y1.size(); ++l) {
    ASSERT_EQ(y1[l].size(), 5u);
    for (double v : y1[l].value().values()) EXPECT_GE(v, 0.0);
    EXPECT_EQ(y1[l].value(), y2[l].value());
  }
  std::vector<const tn::model::IntervalFeatures*> short_window{&w[0]};
  EXPECT_THROW(m1.forward(b1, short_window), tn::ContractError);
}

TEST(TemporalModule, ThreeStepHandRecurrence) {
  ModelConfig c;
  c.forecast.window = 3;
  c.forecast.horizon = 2;
  c.temporal_hidden = 2;
  c.temporal_layers = 2;
  c.head_mlp_layers = 1;
  ParamStore store;
  std::mt19937_64 rng(1);
  tn::model::TemporalModule tm("t", 2, 2, c, store, rng);
  const RefGru g0 = patterned_gru(2, 2, 0.0), g1 = patterned_gru(2, 2, 0.21);
  load_gru(store, "t.gru.l0", g0);
  load_gru(store, "t.gru.l1", g1);
  const std::vector<std::vector<double>> xs{{1.0, -0.5}, {0.2, 0.8}, {-1.5, 0.3}};
  std::vector<double> s0(2, 0.0), s1(2, 0.0);
  for (const auto& x : xs) {
    s0 = g0.step(x, s0);
    s1 = g1.step(s0, s1);
  }
  Tape tape;
  ParamBinder bind(tape);
  std::vector<Var> in;
  for (const auto& x : xs) in.push_back(tape.constant(Tensor::vector(x)));
  const auto state = tm.encode(bind, in);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(state[0].value()[i], s0[i], 1e-14);
    EXPECT_NEAR(state[1].value()[i], s1[i], 1e-14);
  }

  // Decoder re-feeds the last input; head is relu(R z + W z + b) with a 1-layer MLP.
  const std::vector<double> r{0.5, -1.0, 0.25, 0.75}, w{-0.3, 0.4, 0.6, -0.2}, b{0.1, -0.05};
  fill(store, "t.head.residual", r);
  fill(store, "t.head.mlp.l0.weight", w);
  fill(store, "t.head.mlp.l0.bias", b);
  const auto y = tm.decode_and_output(bind, state, in.back());
  ASSERT_EQ(y.size(), 2u);
  for (std::size_t l = 0; l < 2; ++l) {
    s0 = g0.step(xs.back(), s0);
    s1 = g1.step(s0, s1);
    for (std::size_t i = 0; i < 2; ++i) {
      double v = b[i];
      for (std::size_t j = 0; j < 2; ++j) v += (r[i * 2 + j] + w[i * 2 + j]) * s1[j];
      EXPECT_NEAR(y[l].value()[i], std::max(0.0, v), 1e-14);
    }
  }
  EXPECT_THROW(tm.encode(bind, std::vector<Var>(in.begin(), in.begin() + 2)), tn::ContractError);
}

TEST(TemporalModule, ZeroNetworkOutputsZero) {
  ModelConfig c = tn::testing::tiny_config();
  ParamStore store;
  std::mt19937_64 rng(1);
  tn::model::TemporalModule tm("t", 3, 3, c, store, rng);
  fill_prefix(store, "t.", 0.0);
  Tape tape;
  ParamBinder bind(tape);
  std::vector<Var> in(2, tape.constant(Tensor::vector({1.0, -2.0, 3.0})));
  const auto state = tm.encode(bind, in);
  for (const auto& s : state) {
    for (double v : s.value().values()) EXPECT_EQ(v, 0.0);
  }
  for (const auto& y : tm.decode_and_output(bind, state, in.back())) {
    for (double v : y.value().values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(GradientCheck, FullForwardOnToyGraph) {
  Toy toy;
  tn::model::TraffNetModel model(toy.net, toy.graph, tn::testing::tiny_config());
  std::mt19937_64 rng(21);
  std::vector<tn::model::IntervalFeatures> w{tn::testing::random_features(rng, 5, 2),
                                             tn::testing::random_features(rng, 5, 2)};
  std::vector<const tn::model::IntervalFeatures*> ptrs{&w[0], &w[1]};
  std::normal_distribution<double> z(1.0, 0.5);
  std::vector<Tensor> targets;
  for (int l = 0; l < 2; ++l) {
    std::vector<double> t(5);
    for (double& x : t) x = z(rng);
    targets.push_back(Tensor::vector(t));
  }
  auto build = [&](Tape& tape) {
    ParamBinder bind(tape);
    const auto y = model.forward(bind, ptrs);
    Var loss = tn::ad::mse(y[0], tape.constant(targets[0]));
    for (std::size_t l = 1; l < y.size(); ++l) loss = loss + tn::ad::mse(y[l], tape.constant(targets[l]));
    return loss;
  };
  const auto params = model.params().list();
  tn::ad::GradCheckOptions opts;
  opts.trials = 200;
  const auto result = tn::ad::check_gradients(build, params, opts);
  EXPECT_EQ(result.trials, 200u);
  EXPECT_LE(result.max_relative_error, 1e-4)
      << result.worst_parameter << "[" << result.worst_index << "]";
}

TEST(ModelConfig, JsonRoundTripAndHash) {
  ModelConfig c = tn::testing::tiny_config();
  c.assign_uses_attended = true;
  c.leaky_slope = 0.1 + 0.2;
  const auto back = tn::model::model_config_from_json(tn::model::to_json(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(tn::model::config_hash(back), tn::model::config_hash(c));
  ModelConfig d = c;
  d.seed = 8;
  EXPECT_NE(tn::model::config_hash(d), tn::model::config_hash(c));
  EXPECT_THROW(tn::model::model_config_from_json("{\"gru_hidden\": \"x\"}"), tn::ParseError);
}

TEST(AssignUsesAttended, ForwardRunsWithAveragedHeads) {
  Toy toy;
  ModelConfig c = tn::testing::tiny_config();
  c.assign_uses_attended = true;
  tn::model::TraffNetModel model(toy.net, toy.graph, c);
  std::mt19937_64 rng(4);
  const auto f = tn::testing::random_features(rng, 5, 2);
  Tape tape;
  ParamBinder bind(tape);
  const auto out = model.causal().forward(bind, f);
  EXPECT_EQ(out.segment_embeddings.size(), 5 * model.causal().embedding_width());
}

TEST(GruBaseline, ForecastShape) {
  ModelConfig c = tn::testing::tiny_config();
  tn::model::GruBaseline model(4, c);
  std::vector<tn::model::IntervalFeatures> w(2);
  for (auto& f : w) f.volume = {0.1, -0.2, 0.3, 1.0};
  std::vector<const tn::model::IntervalFeatures*> ptrs{&w[0], &w[1]};
  Tape tape;
  ParamBinder bind(tape);
  const auto y = model.forward(bind, ptrs);
  ASSERT_EQ(y.size(), 2u);
  EXPECT_EQ(y[0].size(), 4u);
}
