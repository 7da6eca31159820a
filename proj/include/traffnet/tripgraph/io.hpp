#pragma once

#include <string>
#include <vector>

#include "traffnet/tripgraph/panel.hpp"
#include "traffnet/tripgraph/road_network.hpp"
#include "traffnet/tripgraph/trajectory.hpp"
#include "traffnet/tripgraph/trip_graph.hpp"

namespace traffnet::trip {

inline constexpr int kSchemaVersion = 1;

// JSON documents carry "schema_version" and keep a fixed key order so that
// identical objects serialize to identical bytes.
std::string network_to_json(const RoadNetwork& net);
RoadNetwork network_from_json(const std::string& text);
void save_network(const RoadNetwork& net, const std::string& path);
RoadNetwork load_network(const std::string& path);

std::string trip_graph_to_json(const TripGraph& graph);
TripGraph trip_graph_from_json(const std::string& text);
void save_trip_graph(const TripGraph& graph, const std::string& path);
TripGraph load_trip_graph(const std::string& path);

/// `vehicle_id,timestamp,x,y`, one record per line, optional header. Records
/// of one vehicle are grouped in order of first appearance.
std::string trajectories_to_csv(const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> trajectories_from_csv(const std::string& text);

/// Volume and speed grids: `interval,n0,n1,...`; OD counts:
/// `interval,origin,destination,count`.
std::string grid_to_csv(const std::vector<std::vector<double>>& grid, std::size_t columns);
std::vector<std::vector<double>> grid_from_csv(const std::string& text);
std::string od_series_to_csv(const DemandVolumePanel& panel);

void save_panel(const DemandVolumePanel& panel, const std::string& directory);
DemandVolumePanel load_panel(const std::string& directory);

}  // namespace traffnet::trip
