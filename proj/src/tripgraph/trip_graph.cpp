#include "traffnet/tripgraph/trip_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "traffnet/common/error.hpp"

namespace traffnet::trip {

std::vector<std::size_t> TripGraph::paths_of(std::size_t od_id) const {
  std::vector<std::size_t> out;
  for (const OdPathEdge& e : edges_r) {
    if (e.od_id == od_id) out.push_back(e.path_id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t TripGraph::max_path_length() const {
  std::size_t longest = 0;
  for (const PathNode& p : path_nodes) longest = std::max(longest, p.segment_seq.size());
  return longest;
}

std::size_t TripGraph::find_od(OdPair od) const {
  for (const OdNode& n : od_nodes) {
    if (n.origin == od.origin && n.destination == od.destination) return n.od_id;
  }
  return npos;
}

std::size_t TripGraph::find_path(const std::vector<NodeId>& segments) const {
  for (const PathNode& p : path_nodes) {
    if (p.segment_seq == segments) return p.path_id;
  }
  return npos;
}

void TripGraph::validate(const std::vector<NodeId>* regions) const {
  auto fail = [](const std::string& msg) { throw ValidationError("trip graph: " + msg); };
  for (std::size_t i = 0; i < od_nodes.size(); ++i) {
    if (od_nodes[i].od_id != i) fail("OD ids are not dense");
  }
  std::set<NodeId> segment_ids;
  for (const SegmentNode& s : segment_nodes) segment_ids.insert(s.node_id);

  std::vector<std::size_t> owner_count(path_nodes.size(), 0);
  for (const OdPathEdge& e : edges_r) {
    if (e.path_id >= path_nodes.size() || e.od_id >= od_nodes.size()) {
      fail("edge R references an unknown node");
    }
    if (path_nodes[e.path_id].od_id != e.od_id) fail("edge R disagrees with the path's OD");
    ++owner_count[e.path_id];
  }
  std::vector<std::vector<std::size_t>> orders(path_nodes.size());
  for (const PathSegmentEdge& e : edges_rprime) {
    if (e.path_id >= path_nodes.size()) fail("edge R' references an unknown path");
    const PathNode& p = path_nodes[e.path_id];
    if (e.order == 0 || e.order > p.segment_seq.size() || p.segment_seq[e.order - 1] != e.node_id) {
      fail("edge R' order " + std::to_string(e.order) + " is inconsistent with path " +
           std::to_string(e.path_id));
    }
    orders[e.path_id].push_back(e.order);
  }
  for (std::size_t j = 0; j < path_nodes.size(); ++j) {
    const PathNode& p = path_nodes[j];
    if (p.path_id != j) fail("path ids are not dense");
    if (owner_count[j] != 1) fail("path " + std::to_string(j) + " must belong to exactly one OD");
    if (p.segment_seq.empty()) fail("path " + std::to_string(j) + " is empty");
    std::vector<std::size_t>& o = orders[j];
    std::sort(o.begin(), o.end());
    for (std::size_t k = 0; k < o.size(); ++k) {
      if (o[k] != k + 1) fail("orders of path " + std::to_string(j) + " are not 1..|p|");
    }
    if (o.size() != p.segment_seq.size()) {
      fail("orders of path " + std::to_string(j) + " are not 1..|p|");
    }
    for (NodeId n : p.segment_seq) {
      if (!segment_ids.contains(n)) fail("segment " + std::to_string(n) + " is not a segment node");
    }
    NodeId first = p.segment_seq.front();
    NodeId last = p.segment_seq.back();
    if (regions != nullptr) {
      first = regions->at(first);
      last = regions->at(last);
    }
    const OdNode& od = od_nodes.at(p.od_id);
    if (first != od.origin || last != od.destination) {
      fail("path " + std::to_string(j) + " endpoints do not match its OD");
    }
  }
}

TripGraph build_trip_graph(const std::vector<Trip>& trips, const RoadNetwork& net,
                           const BuildOptions& options) {
  std::map<OdPair, std::map<std::vector<NodeId>, std::size_t>> support;
  for (const Trip& trip : trips) ++support[trip.od][trip.node_seq];

  TripGraph graph;
  std::set<NodeId> used;
  for (const auto& [od, sequences] : support) {
    std::vector<const std::vector<NodeId>*> kept;
    for (const auto& [seq, count] : sequences) {
      if (count >= options.min_support) kept.push_back(&seq);
    }
    if (kept.empty()) continue;
    const std::size_t od_id = graph.od_nodes.size();
    graph.od_nodes.push_back({od_id, od.origin, od.destination});
    for (const std::vector<NodeId>* seq : kept) {
      const std::size_t path_id = graph.path_nodes.size();
      graph.path_nodes.push_back({path_id, od_id, *seq});
      graph.edges_r.push_back({od_id, path_id});
      for (std::size_t k = 0; k < seq->size(); ++k) {
        graph.edges_rprime.push_back({path_id, (*seq)[k], k + 1});
        used.insert((*seq)[k]);
      }
    }
  }
  if (graph.path_nodes.empty()) {
    throw ValidationError("trip graph: no path reaches min_support " +
                          std::to_string(options.min_support));
  }
  for (NodeId id : used) {
    const RoadNode& n = net.node(id);
    graph.segment_nodes.push_back({id, n.length, n.capacity, n.free_speed});
  }
  return graph;
}

std::vector<std::vector<double>> path_departures(const TripGraph& graph,
                                                 const std::vector<Trip>& trips,
                                                 std::size_t num_intervals) {
  std::map<std::vector<NodeId>, std::size_t> index;
  for (const PathNode& p : graph.path_nodes) index.emplace(p.segment_seq, p.path_id);
  std::vector<std::vector<double>> out(graph.path_nodes.size(),
                                       std::vector<double>(num_intervals, 0.0));
  for (const Trip& trip : trips) {
    const auto it = index.find(trip.node_seq);
    if (it == index.end()) continue;
    if (trip.depart_interval < 0 || static_cast<std::size_t>(trip.depart_interval) >= num_intervals) {
      continue;
    }
    out[it->second][static_cast<std::size_t>(trip.depart_interval)] += 1.0;
  }
  return out;
}

}  // namespace traffnet::trip
