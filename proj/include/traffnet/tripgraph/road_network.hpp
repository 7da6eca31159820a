#pragma once

#include <cstddef>
#include <set>
#include <utility>
#include <vector>

namespace traffnet::trip {

using NodeId = std::size_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

double distance(Point a, Point b);

enum class NodeKind { kSegment, kGrid };

struct RoadNode {
  NodeId id = 0;
  NodeKind kind = NodeKind::kSegment;
  double length = 0.0;      // meters
  double capacity = 0.0;    // vehicles per interval
  double free_speed = 0.0;  // meters per second
  Point centroid;

  bool operator==(const RoadNode&) const = default;
};

/// Directed graph whose nodes are road segments (or grid cells). An edge
/// (a, b) means b can be entered directly from a.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  /// Throws ValidationError when ids are not dense, an edge endpoint is
  /// undeclared, an edge repeats, or a static attribute is not positive.
  RoadNetwork(std::vector<RoadNode> nodes, std::vector<std::pair<NodeId, NodeId>> edges);

  const std::vector<RoadNode>& nodes() const noexcept { return nodes_; }
  const std::vector<std::pair<NodeId, NodeId>>& edges() const noexcept { return edges_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }
  const RoadNode& node(NodeId id) const { return nodes_.at(id); }
  bool has_edge(NodeId from, NodeId to) const { return edge_set_.contains({from, to}); }

  bool operator==(const RoadNetwork& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::vector<RoadNode> nodes_;
  std::vector<std::pair<NodeId, NodeId>> edges_;
  std::set<std::pair<NodeId, NodeId>> edge_set_;
};

}  // namespace traffnet::trip
