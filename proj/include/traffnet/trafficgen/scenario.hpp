#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "traffnet/tripgraph/road_network.hpp"
#include "traffnet/tripgraph/trajectory.hpp"

namespace traffnet::gen {

/// Capacity of `segment` is multiplied by capacity_factor for intervals
/// [start, end).
struct EventSpec {
  trip::NodeId segment = 0;
  std::size_t start = 0;
  std::size_t end = 0;
  double capacity_factor = 0.1;

  bool operator==(const EventSpec&) const = default;
};

struct OdSchedule {
  trip::OdPair od;
  std::vector<std::vector<trip::NodeId>> paths;  // candidate node sequences
  std::vector<double> rates;                     // expected departures per interval

  bool operator==(const OdSchedule&) const = default;
};

struct Scenario {
  std::string name;
  trip::RoadNetwork net;
  std::vector<OdSchedule> ods;
  double logit_theta = 0.05;  // per second of path cost
  std::vector<EventSpec> events;
  std::size_t horizon = 0;  // intervals
  std::uint64_t seed = 7;
  bool deterministic = false;
  double interval_seconds = 120.0;
  double gps_period = 30.0;
  /// Delay multiplier slope above capacity.
  double congestion_alpha = 2.0;

  /// Throws ValidationError on invalid paths, negative rates, short
  /// schedules or events outside the horizon.
  void validate() const;
  /// Total candidate paths; paths are indexed OD by OD in schedule order.
  std::size_t num_paths() const;

  bool operator==(const Scenario&) const = default;
};

void validate_event(const EventSpec& event, const trip::RoadNetwork& net, std::size_t horizon);

std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

/// 5x6 grid of 30 segments, 5 ODs over 12 candidate paths, two-minute
/// intervals, daily-shaped demand.
Scenario sy_mini(std::uint64_t seed = 7, std::size_t horizon = 420);
/// sy_mini plus random 10%-capacity events on path segments.
Scenario vs_mini(std::uint64_t seed = 7, std::size_t horizon = 420);

}  // namespace traffnet::gen
