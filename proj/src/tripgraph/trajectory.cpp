#include "traffnet/tripgraph/trajectory.hpp"

#include <cmath>
#include <limits>

#include "traffnet/common/error.hpp"

namespace traffnet::trip {

void Trajectory::validate() const {
  if (points.size() < 2) {
    throw ValidationError("trajectory '" + vehicle_id + "' has fewer than 2 points");
  }
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i].timestamp > points[i - 1].timestamp)) {
      throw ValidationError("trajectory '" + vehicle_id +
                            "' timestamps are not strictly increasing at point " +
                            std::to_string(i));
    }
  }
}

MatchedSequence map_match(const Trajectory& trajectory, const RoadNetwork& net,
                          const MapMatchOptions& options) {
  if (net.empty()) throw ContractError("map_match: empty network");
  trajectory.validate();
  MatchedSequence out;
  for (const TrajectoryPoint& p : trajectory.points) {
    double best = std::numeric_limits<double>::infinity();
    NodeId best_id = 0;
    for (const RoadNode& n : net.nodes()) {
      const double d = distance(p.position, n.centroid);
      if (d < best) {
        best = d;
        best_id = n.id;
      }
    }
    if (best > options.snap_radius) continue;
    if (!out.nodes.empty() && out.nodes.back() == best_id) continue;
    out.nodes.push_back(best_id);
    out.entry_times.push_back(p.timestamp);
  }
  if (out.nodes.empty()) {
    throw ContractError("map_match: no point of '" + trajectory.vehicle_id +
                        "' lies within the snap radius");
  }
  return out;
}

std::vector<Trip> split_trips(const MatchedSequence& matched, const SplitOptions& options,
                              const RoadNetwork* net) {
  for (std::size_t i = 1; i < matched.entry_times.size(); ++i) {
    if (matched.entry_times[i] < matched.entry_times[i - 1]) {
      throw ContractError("split_trips: entry times must be nondecreasing");
    }
  }
  std::vector<Trip> trips;
  auto emit = [&](std::size_t begin, std::size_t end) {
    if (end - begin < 2) return;
    Trip trip;
    trip.node_seq.assign(matched.nodes.begin() + static_cast<std::ptrdiff_t>(begin),
                         matched.nodes.begin() + static_cast<std::ptrdiff_t>(end));
    trip.entry_times.assign(matched.entry_times.begin() + static_cast<std::ptrdiff_t>(begin),
                            matched.entry_times.begin() + static_cast<std::ptrdiff_t>(end));
    NodeId origin = trip.node_seq.front();
    NodeId destination = trip.node_seq.back();
    if (options.regions) {
      origin = options.regions->at(origin);
      destination = options.regions->at(destination);
    }
    trip.od = {origin, destination};
    trip.depart_interval = static_cast<long long>(
        std::floor((trip.entry_times.front() - options.epoch) / options.interval_seconds));
    trips.push_back(std::move(trip));
  };

  std::size_t begin = 0;
  for (std::size_t i = 1; i < matched.nodes.size(); ++i) {
    const bool gap = matched.entry_times[i] - matched.entry_times[i - 1] > options.gap_threshold;
    const bool jump = net != nullptr && !net->has_edge(matched.nodes[i - 1], matched.nodes[i]);
    if (gap || jump) {
      emit(begin, i);
      begin = i;
    }
  }
  emit(begin, matched.nodes.size());
  return trips;
}

std::vector<Trip> extract_trips(const std::vector<Trajectory>& trajectories,
                                const RoadNetwork& net, const MapMatchOptions& match,
                                const SplitOptions& split) {
  std::vector<Trip> trips;
  for (const Trajectory& t : trajectories) {
    MatchedSequence matched;
    try {
      matched = map_match(t, net, match);
    } catch (const ContractError&) {
      continue;
    }
    for (Trip& trip : split_trips(matched, split, &net)) trips.push_back(std::move(trip));
  }
  return trips;
}

}  // namespace traffnet::trip
