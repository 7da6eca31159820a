#include "traffnet/tripgraph/panel.hpp"

#include <algorithm>
#include <cmath>

#include "traffnet/common/error.hpp"

namespace traffnet::trip {

double DemandVolumePanel::demand(std::size_t interval, OdPair od) const {
  const auto& m = od_series.at(interval);
  const auto it = m.find(od);
  return it == m.end() ? 0.0 : it->second;
}

double DemandVolumePanel::total_departures(std::size_t interval) const {
  double total = 0.0;
  for (const auto& [od, count] : od_series.at(interval)) total += count;
  return total;
}

void DemandVolumePanel::validate() const {
  if (od_series.size() != volume_series.size() || speed_series.size() != volume_series.size()) {
    throw ValidationError("panel series disagree on the interval count");
  }
  for (std::size_t t = 0; t < volume_series.size(); ++t) {
    if (volume_series[t].size() != num_nodes || speed_series[t].size() != num_nodes) {
      throw ValidationError("panel interval " + std::to_string(t) + " has the wrong node count");
    }
    for (std::size_t i = 0; i < num_nodes; ++i) {
      if (volume_series[t][i] < 0.0 || speed_series[t][i] < 0.0) {
        throw ValidationError("panel holds a negative value at interval " + std::to_string(t));
      }
    }
    for (const auto& [od, count] : od_series[t]) {
      if (count < 0.0) {
        throw ValidationError("negative OD count at interval " + std::to_string(t));
      }
    }
  }
}

DemandVolumePanel make_empty_panel(std::size_t num_intervals, std::size_t num_nodes,
                                   double interval_seconds) {
  DemandVolumePanel panel;
  panel.interval_seconds = interval_seconds;
  panel.num_nodes = num_nodes;
  panel.od_series.assign(num_intervals, {});
  panel.volume_series.assign(num_intervals, std::vector<double>(num_nodes, 0.0));
  panel.speed_series.assign(num_intervals, std::vector<double>(num_nodes, 0.0));
  return panel;
}

DemandVolumePanel aggregate_demands(const std::vector<Trip>& trips, const RoadNetwork& net,
                                    const AggregateOptions& options) {
  auto interval_of = [&](double time) {
    return static_cast<long long>(std::floor((time - options.epoch) / options.interval_seconds));
  };
  std::size_t count = options.num_intervals;
  if (count == 0) {
    for (const Trip& trip : trips) {
      for (double t : trip.entry_times) {
        count = std::max<std::size_t>(count, static_cast<std::size_t>(std::max(0LL, interval_of(t))) + 1);
      }
    }
  }
  DemandVolumePanel panel = make_empty_panel(count, net.size(), options.interval_seconds);
  std::vector<std::vector<double>> speed_count(count, std::vector<double>(net.size(), 0.0));

  auto in_range = [&](long long t) { return t >= 0 && static_cast<std::size_t>(t) < count; };
  for (const Trip& trip : trips) {
    if (in_range(trip.depart_interval)) {
      panel.od_series[static_cast<std::size_t>(trip.depart_interval)][trip.od] += 1.0;
    }
    for (std::size_t k = 0; k < trip.node_seq.size(); ++k) {
      const long long t = interval_of(trip.entry_times[k]);
      if (!in_range(t)) continue;
      const auto ti = static_cast<std::size_t>(t);
      const NodeId node = trip.node_seq[k];
      panel.volume_series[ti][node] += 1.0;
      if (k + 1 < trip.node_seq.size()) {
        const double dwell = trip.entry_times[k + 1] - trip.entry_times[k];
        if (dwell > 0.0) {
          panel.speed_series[ti][node] += net.node(node).length / dwell;
          speed_count[ti][node] += 1.0;
        }
      }
    }
  }
  for (std::size_t t = 0; t < count; ++t) {
    for (std::size_t i = 0; i < net.size(); ++i) {
      if (speed_count[t][i] > 0.0) panel.speed_series[t][i] /= speed_count[t][i];
    }
  }
  return panel;
}

}  // namespace traffnet::trip
