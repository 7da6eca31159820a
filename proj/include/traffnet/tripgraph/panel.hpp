#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "traffnet/tripgraph/road_network.hpp"
#include "traffnet/tripgraph/trajectory.hpp"

namespace traffnet::trip {

/// Time-indexed OD matrices, node volumes and node mean speeds on one
/// shared interval axis.
struct DemandVolumePanel {
  double interval_seconds = 120.0;
  std::size_t num_nodes = 0;
  std::vector<std::map<OdPair, double>> od_series;
  std::vector<std::vector<double>> volume_series;  // [interval][node]
  std::vector<std::vector<double>> speed_series;   // [interval][node], 0 when untraversed

  std::size_t num_intervals() const noexcept { return volume_series.size(); }
  double demand(std::size_t interval, OdPair od) const;
  double total_departures(std::size_t interval) const;

  void validate() const;
  bool operator==(const DemandVolumePanel&) const = default;
};

DemandVolumePanel make_empty_panel(std::size_t num_intervals, std::size_t num_nodes,
                                   double interval_seconds);

struct AggregateOptions {
  double interval_seconds = 120.0;
  double epoch = 0.0;
  /// 0 sizes the panel to the last interval touched by any trip.
  std::size_t num_intervals = 0;
};

/// Counts departures per OD and entries per node per interval. Node speeds
/// are the mean of length / dwell over traversals that have a successor
/// entry.
DemandVolumePanel aggregate_demands(const std::vector<Trip>& trips, const RoadNetwork& net,
                                    const AggregateOptions& options);

}  // namespace traffnet::trip
