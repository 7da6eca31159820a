#pragma once

#include <cstddef>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "traffnet/trafficgen/scenario.hpp"
#include "traffnet/tripgraph/panel.hpp"
#include "traffnet/tripgraph/trip_graph.hpp"

namespace traffnet::gen {

/// Logit shares: share_i proportional to exp(-theta * cost_i).
std::vector<double> route_choice(std::span<const double> costs, double theta);

struct GroundTruth {
  trip::DemandVolumePanel panel;
  std::vector<trip::Trajectory> trajectories;
  std::vector<trip::Trip> trips;                            // one per vehicle
  std::vector<std::vector<std::vector<double>>> route_shares;  // [t][od][path]
  std::vector<std::vector<double>> path_volumes;              // [t][scenario path index]
  std::vector<std::vector<bool>> affected_mask;               // [t][node]
};

struct IntervalRecord {
  std::vector<std::vector<double>> shares;  // [od][path]
  std::vector<double> departures;           // per scenario path
};

/// Interval-by-interval mesoscopic rollout. Vehicles move node to node; a
/// node's traversal time is length / free_speed times
/// 1 + alpha * max(0, occupancy / capacity - 1), where occupancy counts
/// entries over the trailing interval length. Route choice uses the mean
/// traversal times realized in the previous interval.
class Simulator {
 public:
  explicit Simulator(Scenario scenario);

  /// Activates an event; affected_mask is set over its interval range.
  void apply_event(const EventSpec& event);
  /// Departs this interval's vehicles and advances the clock to its end.
  IntervalRecord step();
  /// Runs remaining intervals, drains vehicles in flight and assembles the
  /// ground truth.
  GroundTruth finish();

  std::size_t interval() const { return interval_; }

 private:
  struct Vehicle {
    std::size_t path = 0;  // scenario path index
    std::size_t od = 0;
    std::vector<double> entries;
    double exit = 0.0;
  };
  using Event = std::tuple<double, std::size_t, std::size_t>;  // time, vehicle, hop

  void advance_until(double time);
  void enter(std::size_t vehicle, std::size_t hop, double time);
  double capacity_factor(trip::NodeId node, double time) const;

  Scenario s_;
  std::size_t interval_ = 0;
  std::vector<std::vector<trip::NodeId>> paths_;
  std::vector<std::size_t> path_od_;
  std::vector<std::vector<double>> factor_;  // [t][node]
  std::vector<std::vector<bool>> affected_;
  std::vector<std::vector<double>> recent_;  // per node entry times (trailing window)
  std::vector<std::size_t> recent_head_;
  std::vector<std::vector<double>> time_sum_, time_count_;  // [t][node]
  std::vector<Vehicle> vehicles_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::vector<std::vector<std::vector<double>>> shares_;
  std::vector<std::vector<double>> path_volumes_;
  std::mt19937_64 rng_;
};

GroundTruth generate(const Scenario& scenario);

/// Path volumes re-indexed to the trip graph's paths (zeros for graph paths
/// that are not scenario candidates).
std::vector<std::vector<double>> align_path_volumes(const Scenario& scenario,
                                                    const GroundTruth& truth,
                                                    const trip::TripGraph& graph);

/// Writes trajectories.csv, panel/, route_shares.json, path_volumes.csv and
/// affected.csv into directory.
void save_ground_truth(const Scenario& scenario, const GroundTruth& truth,
                       const std::string& directory);
std::vector<std::vector<bool>> load_affected(const std::string& path);
/// Shares written by save_ground_truth, [t][scenario od][path].
std::vector<std::vector<std::vector<double>>> load_route_shares(const std::string& path);
std::vector<std::vector<double>> load_path_volumes(const std::string& path);

}  // namespace traffnet::gen
