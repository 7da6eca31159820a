#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "traffnet/tripgraph/road_network.hpp"

namespace traffnet::trip {

struct TrajectoryPoint {
  double timestamp = 0.0;  // seconds since epoch
  Point position;

  bool operator==(const TrajectoryPoint&) const = default;
};

struct Trajectory {
  std::string vehicle_id;
  std::vector<TrajectoryPoint> points;

  /// At least two points with strictly increasing timestamps.
  void validate() const;
};

/// Node sequence produced by map matching, with the first time each node
/// was hit.
struct MatchedSequence {
  std::vector<NodeId> nodes;
  std::vector<double> entry_times;
};

struct MapMatchOptions {
  double snap_radius = 50.0;
};

/// Snaps every point to the nearest node centroid (lowest id on ties),
/// drops points outside the snap radius and collapses consecutive repeats.
/// Throws ContractError when nothing matches.
MatchedSequence map_match(const Trajectory& trajectory, const RoadNetwork& net,
                          const MapMatchOptions& options = {});

struct OdPair {
  NodeId origin = 0;
  NodeId destination = 0;

  auto operator<=>(const OdPair&) const = default;
};

struct Trip {
  std::vector<NodeId> node_seq;
  std::vector<double> entry_times;
  OdPair od;
  long long depart_interval = 0;
};

struct SplitOptions {
  double gap_threshold = 300.0;
  double interval_seconds = 120.0;
  double epoch = 0.0;
  /// Optional node -> region map applied to trip endpoints only.
  std::optional<std::vector<NodeId>> regions;
};

/// Cuts the sequence wherever consecutive entries are more than
/// gap_threshold seconds apart, and additionally wherever consecutive nodes
/// are not joined by an edge when a network is supplied. Pieces shorter
/// than two nodes are discarded.
std::vector<Trip> split_trips(const MatchedSequence& matched, const SplitOptions& options,
                              const RoadNetwork* net = nullptr);

/// map_match + split_trips over a batch of trajectories. Trajectories that
/// match nothing are skipped.
std::vector<Trip> extract_trips(const std::vector<Trajectory>& trajectories,
                                const RoadNetwork& net, const MapMatchOptions& match,
                                const SplitOptions& split);

}  // namespace traffnet::trip
