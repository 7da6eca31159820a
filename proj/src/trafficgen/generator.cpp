#include "traffnet/trafficgen/generator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include <json.hpp>

#include "traffnet/common/error.hpp"
#include "traffnet/common/text.hpp"
#include "traffnet/tripgraph/io.hpp"

namespace traffnet::gen {

std::vector<double> route_choice(std::span<const double> costs, double theta) {
  if (costs.empty()) throw ContractError("route choice over no paths");
  double lo = costs[0];
  for (double c : costs) {
    if (!std::isfinite(c) || c < 0.0) throw ContractError("path cost must be finite and >= 0");
    lo = std::min(lo, c);
  }
  std::vector<double> w(costs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    w[i] = std::exp(-theta * (costs[i] - lo));
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

Simulator::Simulator(Scenario scenario) : s_(std::move(scenario)), rng_(s_.seed) {
  s_.validate();
  const std::size_t nodes = s_.net.size();
  for (std::size_t k = 0; k < s_.ods.size(); ++k) {
    for (const auto& p : s_.ods[k].paths) {
      paths_.push_back(p);
      path_od_.push_back(k);
    }
  }
  factor_.assign(s_.horizon, std::vector<double>(nodes, 1.0));
  affected_.assign(s_.horizon, std::vector<bool>(nodes, false));
  recent_.resize(nodes);
  recent_head_.assign(nodes, 0);
  time_sum_.assign(s_.horizon, std::vector<double>(nodes, 0.0));
  time_count_.assign(s_.horizon, std::vector<double>(nodes, 0.0));
  for (const auto& e : s_.events) apply_event(e);
}

void Simulator::apply_event(const EventSpec& event) {
  validate_event(event, s_.net, s_.horizon);
  for (std::size_t t = event.start; t < event.end; ++t) {
    factor_[t][event.segment] *= event.capacity_factor;
    affected_[t][event.segment] = true;
  }
}

double Simulator::capacity_factor(trip::NodeId node, double time) const {
  const auto t = static_cast<long long>(std::floor(time / s_.interval_seconds));
  if (t < 0 || static_cast<std::size_t>(t) >= s_.horizon) return 1.0;
  return factor_[static_cast<std::size_t>(t)][node];
}

void Simulator::enter(std::size_t vehicle, std::size_t hop, double time) {
  Vehicle& v = vehicles_[vehicle];
  const trip::NodeId node = paths_[v.path][hop];
  v.entries.push_back(time);

  auto& recent = recent_[node];
  auto& head = recent_head_[node];
  recent.push_back(time);
  while (head < recent.size() && recent[head] <= time - s_.interval_seconds) ++head;
  if (head > 1024) {
    recent.erase(recent.begin(), recent.begin() + static_cast<std::ptrdiff_t>(head));
    head = 0;
  }
  const double occupancy = static_cast<double>(recent.size() - head);
  const auto& info = s_.net.node(node);
  const double capacity = info.capacity * capacity_factor(node, time);
  const double delay = 1.0 + s_.congestion_alpha * std::max(0.0, occupancy / capacity - 1.0);
  const double traversal = info.length / info.free_speed * delay;

  const auto t = static_cast<std::size_t>(std::floor(time / s_.interval_seconds));
  if (t < s_.horizon) {
    time_sum_[t][node] += traversal;
    time_count_[t][node] += 1.0;
  }
  if (hop + 1 < paths_[v.path].size()) {
    queue_.emplace(time + traversal, vehicle, hop + 1);
  } else {
    v.exit = time + traversal;
  }
}

void Simulator::advance_until(double time) {
  while (!queue_.empty() && std::get<0>(queue_.top()) < time) {
    const auto [at, vehicle, hop] = queue_.top();
    queue_.pop();
    enter(vehicle, hop, at);
  }
}

IntervalRecord Simulator::step() {
  if (interval_ >= s_.horizon) throw ContractError("simulation past its horizon");
  const std::size_t t = interval_;
  const double start = static_cast<double>(t) * s_.interval_seconds;
  const std::size_t nodes = s_.net.size();

  // Previous-interval realized traversal times, free flow where unobserved.
  std::vector<double> seg_cost(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const auto& info = s_.net.node(i);
    seg_cost[i] = info.length / info.free_speed;
    if (t > 0 && time_count_[t - 1][i] > 0.0) seg_cost[i] = time_sum_[t - 1][i] / time_count_[t - 1][i];
  }

  IntervalRecord rec;
  rec.departures.assign(paths_.size(), 0.0);
  std::size_t first_path = 0;
  std::vector<std::pair<double, std::size_t>> departures;  // time, path
  for (std::size_t k = 0; k < s_.ods.size(); ++k) {
    const auto& od = s_.ods[k];
    std::vector<double> costs;
    for (const auto& p : od.paths) {
      double c = 0.0;
      for (const auto node : p) c += seg_cost[node];
      costs.push_back(c);
    }
    const auto shares = route_choice(costs, s_.logit_theta);
    const double rate = od.rates[t];

    std::vector<std::size_t> assigned;
    if (s_.deterministic) {
      const auto n = static_cast<std::size_t>(std::llround(rate));
      // Largest remainder quotas, lower index first on ties.
      std::vector<std::size_t> quota(shares.size());
      std::vector<std::pair<double, std::size_t>> rest;
      std::size_t used = 0;
      for (std::size_t j = 0; j < shares.size(); ++j) {
        const double exact = shares[j] * static_cast<double>(n);
        quota[j] = static_cast<std::size_t>(std::floor(exact));
        used += quota[j];
        rest.emplace_back(-(exact - std::floor(exact)), j);
      }
      std::sort(rest.begin(), rest.end());
      for (std::size_t i = 0; used < n; ++i, ++used) ++quota[rest[i].second];
      for (std::size_t j = 0; j < shares.size(); ++j) assigned.insert(assigned.end(), quota[j], j);
      for (std::size_t i = 0; i < n; ++i) {
        const double at = start + (static_cast<double>(i) + 0.5) * s_.interval_seconds / static_cast<double>(n);
        departures.emplace_back(at, first_path + assigned[i]);
      }
    } else {
      std::poisson_distribution<long long> count(rate);
      const long long n = rate > 0.0 ? count(rng_) : 0;
      std::uniform_real_distribution<double> when(start, start + s_.interval_seconds);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (long long i = 0; i < n; ++i) {
        const double at = when(rng_);
        double draw = u(rng_), acc = 0.0;
        std::size_t j = 0;
        for (; j + 1 < shares.size(); ++j) {
          acc += shares[j];
          if (draw < acc) break;
        }
        departures.emplace_back(at, first_path + j);
      }
    }
    rec.shares.push_back(shares);
    first_path += od.paths.size();
  }

  for (const auto& [at, path] : departures) {
    rec.departures[path] += 1.0;
    Vehicle v;
    v.path = path;
    v.od = path_od_[path];
    vehicles_.push_back(std::move(v));
    queue_.emplace(at, vehicles_.size() - 1, 0);
  }
  advance_until(start + s_.interval_seconds);

  shares_.push_back(rec.shares);
  path_volumes_.push_back(rec.departures);
  ++interval_;
  return rec;
}

GroundTruth Simulator::finish() {
  while (interval_ < s_.horizon) step();
  advance_until(std::numeric_limits<double>::infinity());

  GroundTruth gt;
  gt.route_shares = shares_;
  gt.path_volumes = path_volumes_;
  gt.affected_mask = affected_;
  for (std::size_t id = 0; id < vehicles_.size(); ++id) {
    const Vehicle& v = vehicles_[id];
    const auto& path = paths_[v.path];
    trip::Trip trip;
    trip.node_seq = path;
    trip.entry_times = v.entries;
    trip.od = s_.ods[v.od].od;
    trip.depart_interval = static_cast<long long>(std::floor(v.entries.front() / s_.interval_seconds));
    gt.trips.push_back(trip);

    trip::Trajectory traj;
    traj.vehicle_id = "v" + std::to_string(id);
    for (std::size_t k = 0; k < path.size(); ++k) {
      const double leave = k + 1 < path.size() ? v.entries[k + 1] : v.exit;
      const auto& where = s_.net.node(path[k]).centroid;
      for (double at = v.entries[k]; at < leave; at += s_.gps_period) {
        traj.points.push_back({at, where});
      }
    }
    gt.trajectories.push_back(std::move(traj));
  }
  gt.panel = trip::aggregate_demands(gt.trips, s_.net, {s_.interval_seconds, 0.0, s_.horizon});
  return gt;
}

GroundTruth generate(const Scenario& scenario) { return Simulator(scenario).finish(); }

std::vector<std::vector<double>> align_path_volumes(const Scenario& scenario,
                                                    const GroundTruth& truth,
                                                    const trip::TripGraph& graph) {
  std::vector<std::size_t> to_graph;
  for (const auto& od : scenario.ods) {
    for (const auto& p : od.paths) to_graph.push_back(graph.find_path(p));
  }
  std::vector<std::vector<double>> out;
  for (const auto& row : truth.path_volumes) {
    std::vector<double> v(graph.path_nodes.size(), 0.0);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (to_graph[j] != trip::TripGraph::npos) v[to_graph[j]] = row[j];
    }
    out.push_back(std::move(v));
  }
  return out;
}

void save_ground_truth(const Scenario& scenario, const GroundTruth& truth,
                       const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const fs::path dir(directory);
  write_file((dir / "trajectories.csv").string(), trip::trajectories_to_csv(truth.trajectories));
  trip::save_panel(truth.panel, (dir / "panel").string());

  nlohmann::ordered_json shares;
  shares["schema_version"] = 1;
  nlohmann::ordered_json ods = nlohmann::ordered_json::array();
  for (const auto& od : scenario.ods) {
    ods.push_back({{"origin", od.od.origin}, {"destination", od.od.destination}, {"paths", od.paths}});
  }
  shares["ods"] = std::move(ods);
  shares["shares"] = truth.route_shares;
  write_file((dir / "route_shares.json").string(), shares.dump() + "\n");

  write_file((dir / "path_volumes.csv").string(),
             trip::grid_to_csv(truth.path_volumes, scenario.num_paths()));
  std::vector<std::vector<double>> mask;
  for (const auto& row : truth.affected_mask) mask.emplace_back(row.begin(), row.end());
  write_file((dir / "affected.csv").string(), trip::grid_to_csv(mask, scenario.net.size()));
}

std::vector<std::vector<bool>> load_affected(const std::string& path) {
  std::vector<std::vector<bool>> out;
  for (const auto& row : trip::grid_from_csv(read_file(path))) {
    std::vector<bool> r;
    for (double v : row) r.push_back(v != 0.0);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> load_route_shares(const std::string& path) {
  const auto doc = nlohmann::json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("shares")) {
    throw ParseError("not a route share document", 0, "shares");
  }
  if (doc.value("schema_version", 0) != 1) throw ParseError("unsupported schema_version", 0, "schema_version");
  return doc["shares"].get<std::vector<std::vector<std::vector<double>>>>();
}

std::vector<std::vector<double>> load_path_volumes(const std::string& path) {
  return trip::grid_from_csv(read_file(path));
}

}  // namespace traffnet::gen
