#pragma once

#include <random>
#include <vector>

#include "random_trips.hpp"
#include "traffnet/model/config.hpp"
#include "traffnet/model/features.hpp"
#include "traffnet/tripgraph/trip_graph.hpp"

namespace traffnet::testing {

/// Two ODs, three paths: (0->3) via 1 or 2, (1->4) direct.
inline trip::TripGraph toy_graph(const trip::RoadNetwork& net) {
  std::vector<trip::Trip> trips(3);
  trips[0].node_seq = {0, 1, 3};
  trips[1].node_seq = {0, 2, 3};
  trips[2].node_seq = {1, 4};
  for (auto& t : trips) {
    t.entry_times.assign(t.node_seq.size(), 0.0);
    t.od = {t.node_seq.front(), t.node_seq.back()};
  }
  return trip::build_trip_graph(trips, net, {.min_support = 1});
}

inline model::ModelConfig tiny_config() {
  model::ModelConfig c;
  c.forecast.window = 2;
  c.forecast.horizon = 2;
  c.gru_hidden = 2;
  c.gru_layers = 2;
  c.gat_hidden = 3;
  c.gat_heads = 2;
  c.route_mlp_layers = 3;
  c.route_mlp_hidden = 4;
  c.temporal_hidden = 4;
  c.temporal_layers = 2;
  c.head_mlp_layers = 2;
  c.seed = 11;
  return c;
}

inline model::IntervalFeatures random_features(std::mt19937_64& rng, std::size_t nodes,
                                               std::size_t ods) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> d(0.2, 2.0);
  model::IntervalFeatures f;
  for (std::size_t i = 0; i < ods; ++i) f.demand.push_back(d(rng));
  for (std::size_t i = 0; i < nodes; ++i) {
    f.volume.push_back(z(rng));
    f.speed.push_back(z(rng));
  }
  return f;
}

}  // namespace traffnet::testing
