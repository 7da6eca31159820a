#include "traffnet/tripgraph/road_network.hpp"

#include <cmath>
#include <string>

#include "traffnet/common/error.hpp"

namespace traffnet::trip {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

RoadNetwork::RoadNetwork(std::vector<RoadNode> nodes, std::vector<std::pair<NodeId, NodeId>> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const RoadNode& n = nodes_[i];
    if (n.id != i) {
      throw ValidationError("node ids must be dense: position " + std::to_string(i) +
                            " holds id " + std::to_string(n.id));
    }
    if (!(n.length > 0.0) || !(n.capacity > 0.0) || !(n.free_speed > 0.0)) {
      throw ValidationError("node " + std::to_string(i) +
                            " needs positive length, capacity and free_speed");
    }
  }
  for (const auto& [from, to] : edges_) {
    if (from >= nodes_.size() || to >= nodes_.size()) {
      throw ValidationError("edge (" + std::to_string(from) + ", " + std::to_string(to) +
                            ") references an undeclared node");
    }
    if (!edge_set_.insert({from, to}).second) {
      throw ValidationError("duplicate edge (" + std::to_string(from) + ", " +
                            std::to_string(to) + ")");
    }
  }
}

}  // namespace traffnet::trip
