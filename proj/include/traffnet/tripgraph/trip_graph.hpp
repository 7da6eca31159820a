#pragma once

#include <cstddef>
#include <vector>

#include "traffnet/tripgraph/road_network.hpp"
#include "traffnet/tripgraph/trajectory.hpp"

namespace traffnet::trip {

struct OdNode {
  std::size_t od_id = 0;
  NodeId origin = 0;
  NodeId destination = 0;

  bool operator==(const OdNode&) const = default;
};

struct PathNode {
  std::size_t path_id = 0;
  std::size_t od_id = 0;
  std::vector<NodeId> segment_seq;

  bool operator==(const PathNode&) const = default;
};

struct SegmentNode {
  NodeId node_id = 0;
  double length = 0.0;
  double capacity = 0.0;
  double free_speed = 0.0;

  bool operator==(const SegmentNode&) const = default;
};

struct OdPathEdge {
  std::size_t od_id = 0;
  std::size_t path_id = 0;

  bool operator==(const OdPathEdge&) const = default;
};

/// Segment node_id is the order-th (1-based) segment of path path_id.
struct PathSegmentEdge {
  std::size_t path_id = 0;
  NodeId node_id = 0;
  std::size_t order = 0;

  bool operator==(const PathSegmentEdge&) const = default;
};

/// Tripartite OD / path / segment graph.
struct TripGraph {
  std::vector<OdNode> od_nodes;
  std::vector<PathNode> path_nodes;
  std::vector<SegmentNode> segment_nodes;
  std::vector<OdPathEdge> edges_r;
  std::vector<PathSegmentEdge> edges_rprime;

  /// Path ids of one OD in ascending order.
  std::vector<std::size_t> paths_of(std::size_t od_id) const;
  std::size_t max_path_length() const;
  /// Index of the OD node with the given endpoints, or npos.
  std::size_t find_od(OdPair od) const;
  /// Index of the path with exactly this node sequence, or npos.
  std::size_t find_path(const std::vector<NodeId>& segments) const;

  /// Checks the structural invariants; throws ValidationError.
  void validate(const std::vector<NodeId>* regions = nullptr) const;

  bool operator==(const TripGraph&) const = default;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

struct BuildOptions {
  std::size_t min_support = 2;
};

/// Distinct OD pairs become OD nodes, distinct node sequences seen at least
/// min_support times become path nodes. ODs left without paths are dropped.
/// Throws ValidationError when no path survives.
TripGraph build_trip_graph(const std::vector<Trip>& trips, const RoadNetwork& net,
                           const BuildOptions& options = {});

/// Trips per path per departure interval ([path][interval]); trips whose
/// sequence is not a graph path are ignored.
std::vector<std::vector<double>> path_departures(const TripGraph& graph,
                                                 const std::vector<Trip>& trips,
                                                 std::size_t num_intervals);

}  // namespace traffnet::trip
