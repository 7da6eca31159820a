#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <random>

#include "../support/random_trips.hpp"
#include "traffnet/common/error.hpp"
#include "traffnet/tripgraph/io.hpp"
#include "traffnet/tripgraph/panel.hpp"
#include "traffnet/tripgraph/trajectory.hpp"
#include "traffnet/tripgraph/trip_graph.hpp"

namespace traffnet::trip {
namespace {

RoadNetwork corridor(std::size_t n) {
  std::vector<RoadNode> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back({i, NodeKind::kSegment, 400.0, 30.0, 12.0, {400.0 * static_cast<double>(i), 0.0}});
    if (i > 0) edges.emplace_back(i - 1, i);
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

Trajectory through_centroids(const RoadNetwork& net, const std::vector<NodeId>& ids,
                             double start = 0.0, double step = 20.0) {
  Trajectory t{"v", {}};
  double time = start;
  for (NodeId id : ids) {
    t.points.push_back({time, net.node(id).centroid});
    time += step;
  }
  return t;
}

Trip make_trip(std::vector<NodeId> seq, double start, double interval_seconds = 120.0) {
  Trip t;
  t.node_seq = std::move(seq);
  for (std::size_t k = 0; k < t.node_seq.size(); ++k) t.entry_times.push_back(start + 40.0 * static_cast<double>(k));
  t.od = {t.node_seq.front(), t.node_seq.back()};
  t.depart_interval = static_cast<long long>(std::floor(start / interval_seconds));
  return t;
}

TEST(RoadNetworkTest, RejectsBadInput) {
  EXPECT_THROW(RoadNetwork({{1, NodeKind::kSegment, 1, 1, 1, {}}}, {}), ValidationError);
  EXPECT_THROW(RoadNetwork({{0, NodeKind::kSegment, 0, 1, 1, {}}}, {}), ValidationError);
  EXPECT_THROW(RoadNetwork({{0, NodeKind::kSegment, 1, 1, 1, {}}}, {{0, 1}}), ValidationError);
  EXPECT_THROW(RoadNetwork({{0, NodeKind::kSegment, 1, 1, 1, {}}, {1, NodeKind::kSegment, 1, 1, 1, {5, 0}}},
                           {{0, 1}, {0, 1}}),
               ValidationError);
}

TEST(MapMatchTest, PointOnCentroidMatchesThatNode) {
  const RoadNetwork net = corridor(5);
  Trajectory t{"v", {{0.0, net.node(3).centroid}, {5.0, net.node(3).centroid}}};
  const MatchedSequence m = map_match(t, net);
  EXPECT_EQ(m.nodes, std::vector<NodeId>{3});
}

TEST(MapMatchTest, CollapsesRepeatsKeepingFirstEntry) {
  const RoadNetwork net = corridor(3);
  const MatchedSequence m = map_match(through_centroids(net, {1, 1, 2}, 100.0, 10.0), net);
  EXPECT_EQ(m.nodes, (std::vector<NodeId>{1, 2}));
  EXPECT_EQ(m.entry_times, (std::vector<double>{100.0, 120.0}));
}

TEST(MapMatchTest, JitteredCorridorMatchesBruteForce) {
  const RoadNetwork net = corridor(3);
  const std::vector<Point> pts = {{12, -9}, {-20, 14}, {391, 25}, {417, -30}, {806, 3}};
  Trajectory t{"v", {}};
  for (std::size_t i = 0; i < pts.size(); ++i) t.points.push_back({10.0 * static_cast<double>(i), pts[i]});

  std::vector<NodeId> expected;
  for (const Point& p : pts) {
    NodeId best = 0;
    for (NodeId id = 1; id < 3; ++id) {
      if (std::hypot(p.x - net.node(id).centroid.x, p.y - net.node(id).centroid.y) <
          std::hypot(p.x - net.node(best).centroid.x, p.y - net.node(best).centroid.y)) {
        best = id;
      }
    }
    if (expected.empty() || expected.back() != best) expected.push_back(best);
  }
  ASSERT_EQ(expected, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(map_match(t, net).nodes, expected);
}

TEST(MapMatchTest, DropsFarPointsAndFailsWhenNothingMatches) {
  const RoadNetwork net = corridor(3);
  Trajectory t{"v", {{0, {0, 0}}, {10, {200, 0}}, {20, {400, 0}}}};
  EXPECT_EQ(map_match(t, net).nodes, (std::vector<NodeId>{0, 1}));
  Trajectory far{"w", {{0, {0, 500}}, {10, {400, 500}}}};
  EXPECT_THROW(map_match(far, net), ContractError);
}

TEST(MapMatchTest, IdempotentOnMatchedCentroidSequences) {
  const RoadNetwork net = corridor(6);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> jitter(-40.0, 40.0);
  for (int trial = 0; trial < 20; ++trial) {
    Trajectory t{"v", {}};
    for (int i = 0; i < 12; ++i) {
      t.points.push_back({5.0 * i, {200.0 * i + jitter(rng), jitter(rng)}});
    }
    MatchedSequence first;
    try {
      first = map_match(t, net);
    } catch (const ContractError&) {
      continue;
    }
    if (first.nodes.size() < 2) continue;
    Trajectory again{"v", {}};
    for (std::size_t k = 0; k < first.nodes.size(); ++k) {
      again.points.push_back({first.entry_times[k], net.node(first.nodes[k]).centroid});
    }
    const MatchedSequence second = map_match(again, net);
    EXPECT_EQ(second.nodes, first.nodes);
    EXPECT_EQ(second.entry_times, first.entry_times);
  }
}

TEST(SplitTripsTest, NoGapGivesOneTrip) {
  const MatchedSequence m{{0, 1, 2}, {0, 100, 200}};
  const auto trips = split_trips(m, {});
  ASSERT_EQ(trips.size(), 1u);
  EXPECT_EQ(trips[0].od, (OdPair{0, 2}));
}

TEST(SplitTripsTest, LongGapCutsInTwo) {
  const MatchedSequence m{{0, 1, 2, 3}, {0, 100, 700, 800}};
  const auto trips = split_trips(m, {});
  ASSERT_EQ(trips.size(), 2u);
  EXPECT_EQ(trips[0].node_seq, (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(trips[1].node_seq, (std::vector<NodeId>{2, 3}));
  EXPECT_EQ(trips[1].depart_interval, 5);
}

TEST(SplitTripsTest, MixedGapsDropShortPieces) {
  // gaps 100, 400, 50, 400 -> pieces {0,1} {2,3} {4}; the singleton is dropped.
  const MatchedSequence m{{0, 1, 2, 3, 4}, {0, 100, 500, 550, 950}};
  const auto trips = split_trips(m, {});
  ASSERT_EQ(trips.size(), 2u);
  EXPECT_EQ(trips[0].node_seq, (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(trips[1].node_seq, (std::vector<NodeId>{2, 3}));
}

TEST(SplitTripsTest, RegionsApplyToEndpointsOnly) {
  SplitOptions opts;
  opts.regions = std::vector<NodeId>{7, 7, 8, 8};
  const auto trips = split_trips({{0, 1, 2, 3}, {0, 10, 20, 30}}, opts);
  ASSERT_EQ(trips.size(), 1u);
  EXPECT_EQ(trips[0].od, (OdPair{7, 8}));
  EXPECT_EQ(trips[0].node_seq, (std::vector<NodeId>{0, 1, 2, 3}));
}

TEST(SplitTripsTest, CutsAtNonAdjacentJumps) {
  const RoadNetwork net = corridor(4);
  const auto trips = split_trips({{0, 1, 3, 2}, {0, 10, 20, 30}}, {}, &net);
  ASSERT_EQ(trips.size(), 1u);
  EXPECT_EQ(trips[0].node_seq, (std::vector<NodeId>{0, 1}));
}

TEST(AggregateTest, CountsDepartures) {
  const RoadNetwork net = corridor(3);
  std::vector<Trip> trips(3, make_trip({0, 1, 2}, 7 * 120.0 + 5.0));
  AggregateOptions opts;
  const DemandVolumePanel p = aggregate_demands(trips, net, opts);
  EXPECT_EQ(p.demand(7, {0, 2}), 3.0);
  EXPECT_EQ(p.total_departures(7), 3.0);
  EXPECT_EQ(p.volume_series[7][0], 3.0);
  EXPECT_DOUBLE_EQ(p.speed_series[7][0], 400.0 / 40.0);
}

TEST(AggregateTest, EmptyTripsGiveZeroPanel) {
  const RoadNetwork net = corridor(4);
  AggregateOptions opts;
  opts.num_intervals = 5;
  const DemandVolumePanel p = aggregate_demands({}, net, opts);
  EXPECT_EQ(p, make_empty_panel(5, 4, 120.0));
}

TEST(AggregateTest, MatchesPerTripTally) {
  const RoadNetwork net = testing::complete_network(4);
  std::mt19937_64 rng(41);
  const auto trips = testing::random_trips(rng, 10, 4, 5, 120.0, 6);
  AggregateOptions opts;
  opts.num_intervals = 8;
  const DemandVolumePanel p = aggregate_demands(trips, net, opts);

  std::vector<std::vector<double>> volume(8, std::vector<double>(4, 0.0));
  std::map<std::pair<long long, OdPair>, double> od;
  for (const Trip& t : trips) {
    od[{t.depart_interval, t.od}] += 1.0;
    for (std::size_t k = 0; k < t.node_seq.size(); ++k) {
      const auto ti = static_cast<std::size_t>(t.entry_times[k] / 120.0);
      if (ti < 8) volume[ti][t.node_seq[k]] += 1.0;
    }
  }
  EXPECT_EQ(p.volume_series, volume);
  for (std::size_t t = 0; t < 8; ++t) {
    for (const auto& [key, count] : p.od_series[t]) {
      const double expected = od[{static_cast<long long>(t), key}];
      EXPECT_EQ(count, expected);
    }
  }
  double total = 0;
  for (std::size_t t = 0; t < 8; ++t) total += p.total_departures(t);
  EXPECT_EQ(total, 10.0);
}

TEST(AggregateTest, CountsAreAdditive) {
  const RoadNetwork net = testing::complete_network(5);
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = testing::random_trips(rng, 15, 5, 6, 120.0, 5);
    const auto b = testing::random_trips(rng, 15, 5, 6, 120.0, 5);
    std::vector<Trip> both = a;
    both.insert(both.end(), b.begin(), b.end());
    AggregateOptions opts;
    opts.num_intervals = 8;
    const auto pa = aggregate_demands(a, net, opts);
    const auto pb = aggregate_demands(b, net, opts);
    const auto pab = aggregate_demands(both, net, opts);
    for (std::size_t t = 0; t < 8; ++t) {
      for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(pab.volume_series[t][i], pa.volume_series[t][i] + pb.volume_series[t][i]);
      }
      for (const auto& [od, count] : pab.od_series[t]) {
        EXPECT_EQ(count, pa.demand(t, od) + pb.demand(t, od));
      }
    }
  }
}

class TripGraphTest : public ::testing::Test {
 protected:
  // A=0, B=1, C=2, D=3
  RoadNetwork net = [] {
    std::vector<RoadNode> nodes;
    for (std::size_t i = 0; i < 4; ++i) {
      nodes.push_back({i, NodeKind::kSegment, 300.0, 20.0, 10.0, {1000.0 * static_cast<double>(i), 0.0}});
    }
    return RoadNetwork(std::move(nodes), {{0, 1}, {1, 2}, {0, 3}, {3, 2}});
  }();
  std::vector<Trip> trips = {make_trip({0, 1, 2}, 0), make_trip({0, 1, 2}, 130),
                             make_trip({0, 3, 2}, 10), make_trip({0, 3, 2}, 250)};
};

TEST_F(TripGraphTest, TwoPathExample) {
  BuildOptions opts;
  opts.min_support = 1;
  const TripGraph g = build_trip_graph(trips, net, opts);
  EXPECT_EQ(g.od_nodes.size(), 1u);
  EXPECT_EQ(g.path_nodes.size(), 2u);
  EXPECT_EQ(g.segment_nodes.size(), 4u);
  EXPECT_EQ(g.edges_r.size(), 2u);
  ASSERT_EQ(g.edges_rprime.size(), 6u);
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<std::size_t> orders;
    for (const auto& e : g.edges_rprime) {
      if (e.path_id == j) orders.push_back(e.order);
    }
    EXPECT_EQ(orders, (std::vector<std::size_t>{1, 2, 3}));
  }
  EXPECT_NO_THROW(g.validate());
}

TEST_F(TripGraphTest, SingletonPath) {
  const std::vector<Trip> same(3, make_trip({0, 1, 2}, 0));
  const TripGraph g = build_trip_graph(same, net);
  ASSERT_EQ(g.path_nodes.size(), 1u);
  EXPECT_EQ(g.od_nodes.size(), 1u);
  EXPECT_EQ(g.edges_rprime.back().order, 3u);
}

TEST_F(TripGraphTest, SupportFilterCanEmptyTheGraph) {
  BuildOptions opts;
  opts.min_support = 3;
  EXPECT_THROW(build_trip_graph(trips, net, opts), ValidationError);
}

TEST_F(TripGraphTest, ValidateCatchesBrokenOrders) {
  TripGraph g = build_trip_graph(trips, net, {1});
  g.edges_rprime[1].order = 3;
  EXPECT_THROW(g.validate(), ValidationError);
}

TEST(TripGraphPropertyTest, PathDeparturesSumToOdDemand) {
  const RoadNetwork net = testing::complete_network(5);
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Trip> trips = testing::random_trips(rng, 40, 5, 4, 120.0, 6);
    // duplicate so every path has support >= 2
    const auto copy = trips;
    trips.insert(trips.end(), copy.begin(), copy.end());
    const TripGraph g = build_trip_graph(trips, net);
    AggregateOptions opts;
    opts.num_intervals = 6;
    const auto panel = aggregate_demands(trips, net, opts);
    const auto dep = path_departures(g, trips, 6);
    for (const OdNode& od : g.od_nodes) {
      for (std::size_t t = 0; t < 6; ++t) {
        double total = 0;
        for (std::size_t j : g.paths_of(od.od_id)) total += dep[j][t];
        EXPECT_EQ(total, panel.demand(t, {od.origin, od.destination}));
      }
    }
    EXPECT_NO_THROW(g.validate());
  }
}

TEST(GraphIoTest, RoundTripIsIdentity) {
  const RoadNetwork net = testing::complete_network(4);
  const std::vector<Trip> trips = {make_trip({0, 1, 2}, 0), make_trip({0, 3, 2}, 10)};
  const TripGraph g = build_trip_graph(trips, net, {1});
  const auto path = std::filesystem::temp_directory_path() / "traffnet_graph_io.json";
  save_trip_graph(g, path.string());
  EXPECT_EQ(load_trip_graph(path.string()), g);
  EXPECT_EQ(network_from_json(network_to_json(net)), net);
}

TEST(GraphIoTest, TruncatedFileIsAParseErrorWithLine) {
  const RoadNetwork net = testing::complete_network(3);
  const TripGraph g = build_trip_graph({make_trip({0, 1, 2}, 0)}, net, {1});
  const std::string text = trip_graph_to_json(g);
  try {
    trip_graph_from_json(text.substr(0, text.size() / 2));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_GT(e.line(), 1u);
  }
}

TEST(GraphIoTest, MissingFieldNamesTheField) {
  try {
    trip_graph_from_json(R"({"schema_version": 1, "od_nodes": []})");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "trip_graph.path_nodes");
  }
}

TEST(GraphIoTest, RandomGraphsSerializeBitEqual) {
  const RoadNetwork net = testing::complete_network(6);
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 100; ++trial) {
    const auto trips = testing::random_trips(rng, 12, 6, 5, 120.0, 4);
    const TripGraph g = build_trip_graph(trips, net, {1});
    const std::string once = trip_graph_to_json(g);
    const TripGraph back = trip_graph_from_json(once);
    EXPECT_EQ(back, g);
    EXPECT_EQ(trip_graph_to_json(back), once);
  }
}

TEST(TrajectoryIoTest, CsvRoundTripAndErrors) {
  const std::vector<Trajectory> ts = {{"a", {{0.5, {1.25, 2}}, {3, {4, 5}}}},
                                      {"b", {{1, {0.1, 0.2}}, {2, {0.3, 1e-7}}}}};
  const auto back = trajectories_from_csv(trajectories_to_csv(ts));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].points[0].position, (Point{1.25, 2}));
  EXPECT_EQ(back[1].points[1].position.y, 1e-7);
  try {
    trajectories_from_csv("vehicle_id,timestamp,x,y\na,1,2,3\na,0.5,2,3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(trajectories_from_csv("a,1,2\n"), ParseError);
  EXPECT_THROW(trajectories_from_csv("a,1,x,3\n"), ParseError);
}

TEST(PanelIoTest, SaveLoadRoundTrip) {
  const RoadNetwork net = testing::complete_network(4);
  std::mt19937_64 rng(59);
  AggregateOptions opts;
  opts.num_intervals = 5;
  const auto panel = aggregate_demands(testing::random_trips(rng, 20, 4, 4, 120.0, 5), net, opts);
  const auto dir = std::filesystem::temp_directory_path() / "traffnet_panel_io";
  save_panel(panel, dir.string());
  EXPECT_EQ(load_panel(dir.string()), panel);
}

}  // namespace
}  // namespace traffnet::trip
