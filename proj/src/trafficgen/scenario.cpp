#include "traffnet/trafficgen/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <json.hpp>

#include "traffnet/common/error.hpp"
#include "traffnet/common/text.hpp"
#include "traffnet/tripgraph/io.hpp"

namespace traffnet::gen {

using Json = nlohmann::ordered_json;
namespace {
constexpr int kSchemaVersion = 1;
}

void validate_event(const EventSpec& e, const trip::RoadNetwork& net, std::size_t horizon) {
  if (e.segment >= net.size()) {
    throw ValidationError("event on unknown segment " + std::to_string(e.segment));
  }
  if (!(e.start < e.end) || e.end > horizon) {
    throw ValidationError("event interval [" + std::to_string(e.start) + ", " +
                          std::to_string(e.end) + ") outside horizon " + std::to_string(horizon));
  }
  if (!(e.capacity_factor > 0.0 && e.capacity_factor <= 1.0)) {
    throw ValidationError("capacity_factor must be in (0, 1]");
  }
}

void Scenario::validate() const {
  if (horizon == 0) throw ValidationError("scenario horizon must be positive");
  if (!(interval_seconds > 0.0) || !(gps_period > 0.0)) {
    throw ValidationError("interval and GPS period must be positive");
  }
  if (!std::isfinite(logit_theta) || logit_theta < 0.0) throw ValidationError("logit_theta must be >= 0");
  for (std::size_t k = 0; k < ods.size(); ++k) {
    const auto& od = ods[k];
    const std::string where = "od " + std::to_string(k);
    if (od.paths.empty()) throw ValidationError(where + " has no candidate paths");
    if (od.rates.size() < horizon) throw ValidationError(where + " schedule shorter than horizon");
    for (double r : od.rates) {
      if (!(r >= 0.0) || !std::isfinite(r)) throw ValidationError(where + " has a negative rate");
    }
    for (const auto& p : od.paths) {
      if (p.size() < 2) throw ValidationError(where + " path shorter than two segments");
      if (p.front() != od.od.origin || p.back() != od.od.destination) {
        throw ValidationError(where + " path does not join its origin and destination");
      }
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] >= net.size()) throw ValidationError(where + " path uses unknown segment");
        if (i > 0 && !net.has_edge(p[i - 1], p[i])) {
          throw ValidationError(where + " path steps between non-adjacent segments");
        }
      }
    }
  }
  for (const auto& e : events) validate_event(e, net, horizon);
}

std::size_t Scenario::num_paths() const {
  std::size_t n = 0;
  for (const auto& od : ods) n += od.paths.size();
  return n;
}

std::string scenario_to_json(const Scenario& s) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["name"] = s.name;
  doc["horizon"] = s.horizon;
  doc["seed"] = s.seed;
  doc["deterministic"] = s.deterministic;
  doc["interval_seconds"] = s.interval_seconds;
  doc["gps_period"] = s.gps_period;
  doc["logit_theta"] = s.logit_theta;
  doc["congestion_alpha"] = s.congestion_alpha;
  doc["network"] = Json::parse(trip::network_to_json(s.net));
  Json ods = Json::array();
  for (const auto& od : s.ods) {
    ods.push_back({{"origin", od.od.origin},
                   {"destination", od.od.destination},
                   {"paths", od.paths},
                   {"rates", od.rates}});
  }
  doc["ods"] = std::move(ods);
  Json events = Json::array();
  for (const auto& e : s.events) {
    events.push_back({{"segment", e.segment},
                      {"start", e.start},
                      {"end", e.end},
                      {"capacity_factor", e.capacity_factor}});
  }
  doc["events"] = std::move(events);
  return doc.dump(1) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  Scenario s;
  try {
    const Json doc = Json::parse(text);
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw ParseError("unsupported schema version", 0, "scenario.schema_version");
    }
    s.name = doc.value("name", std::string());
    doc.at("horizon").get_to(s.horizon);
    s.seed = doc.value("seed", std::uint64_t{7});
    s.deterministic = doc.value("deterministic", false);
    s.interval_seconds = doc.value("interval_seconds", 120.0);
    s.gps_period = doc.value("gps_period", 30.0);
    s.logit_theta = doc.value("logit_theta", 0.05);
    s.congestion_alpha = doc.value("congestion_alpha", 2.0);
    s.net = trip::network_from_json(doc.at("network").dump());
    for (const auto& o : doc.at("ods")) {
      OdSchedule od;
      o.at("origin").get_to(od.od.origin);
      o.at("destination").get_to(od.od.destination);
      o.at("paths").get_to(od.paths);
      o.at("rates").get_to(od.rates);
      s.ods.push_back(std::move(od));
    }
    if (doc.contains("events")) {
      for (const auto& e : doc.at("events")) {
        EventSpec ev;
        e.at("segment").get_to(ev.segment);
        e.at("start").get_to(ev.start);
        e.at("end").get_to(ev.end);
        ev.capacity_factor = e.value("capacity_factor", 0.1);
        s.events.push_back(ev);
      }
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed scenario: ") + e.what(), 0, "scenario");
  }
  s.validate();
  return s;
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  write_file(path, scenario_to_json(scenario));
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(read_file(path)); }

namespace {

constexpr std::size_t kRows = 5, kCols = 6;

trip::NodeId cell(std::size_t r, std::size_t c) { return r * kCols + c; }

trip::RoadNetwork grid_network() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> length(260.0, 520.0), speed(9.0, 14.0), cap(9.0, 14.0);
  std::vector<trip::RoadNode> nodes;
  std::vector<std::pair<trip::NodeId, trip::NodeId>> edges;
  for (std::size_t r = 0; r < kRows; ++r) {
    for (std::size_t c = 0; c < kCols; ++c) {
      trip::RoadNode n;
      n.id = cell(r, c);
      n.length = std::round(length(rng));
      n.free_speed = std::round(speed(rng) * 10.0) / 10.0;
      n.capacity = std::round(cap(rng));
      n.centroid = {400.0 * static_cast<double>(c), 400.0 * static_cast<double>(r)};
      nodes.push_back(n);
      if (c + 1 < kCols) {
        edges.emplace_back(cell(r, c), cell(r, c + 1));
        edges.emplace_back(cell(r, c + 1), cell(r, c));
      }
      if (r + 1 < kRows) {
        edges.emplace_back(cell(r, c), cell(r + 1, c));
        edges.emplace_back(cell(r + 1, c), cell(r, c));
      }
    }
  }
  return trip::RoadNetwork(std::move(nodes), std::move(edges));
}

// Straight grid moves through the given corners.
std::vector<trip::NodeId> through(std::initializer_list<std::pair<int, int>> corners) {
  std::vector<trip::NodeId> path;
  auto it = corners.begin();
  int r = it->first, c = it->second;
  path.push_back(cell(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
  for (++it; it != corners.end(); ++it) {
    while (r != it->first || c != it->second) {
      if (r != it->first) r += it->first > r ? 1 : -1;
      else c += it->second > c ? 1 : -1;
      path.push_back(cell(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
    }
  }
  return path;
}

}  // namespace

Scenario sy_mini(std::uint64_t seed, std::size_t horizon) {
  Scenario s;
  s.name = "SY-mini";
  s.net = grid_network();
  s.horizon = horizon;
  s.seed = seed;
  struct Spec {
    std::pair<int, int> from, to;
    std::vector<std::vector<trip::NodeId>> paths;
    double base, phase;
  };
  const std::vector<Spec> specs{
      {{0, 0}, {2, 5},
       {through({{0, 0}, {0, 5}, {2, 5}}), through({{0, 0}, {2, 0}, {2, 5}}),
        through({{0, 0}, {1, 0}, {1, 5}, {2, 5}})},
       6.0, 0.0},
      {{0, 0}, {4, 3},
       {through({{0, 0}, {0, 3}, {4, 3}}), through({{0, 0}, {4, 0}, {4, 3}}),
        through({{0, 0}, {2, 0}, {2, 3}, {4, 3}})},
       5.0, 1.0},
      {{4, 0}, {1, 5}, {through({{4, 0}, {4, 5}, {1, 5}}), through({{4, 0}, {1, 0}, {1, 5}})}, 5.0, 2.0},
      {{4, 0}, {2, 4}, {through({{4, 0}, {4, 4}, {2, 4}}), through({{4, 0}, {2, 0}, {2, 4}})}, 4.0, 3.0},
      {{0, 5}, {3, 2}, {through({{0, 5}, {0, 2}, {3, 2}}), through({{0, 5}, {3, 5}, {3, 2}})}, 4.0, 4.0},
  };
  const double period = 120.0;
  for (const auto& spec : specs) {
    OdSchedule od;
    od.od = {cell(static_cast<std::size_t>(spec.from.first), static_cast<std::size_t>(spec.from.second)),
             cell(static_cast<std::size_t>(spec.to.first), static_cast<std::size_t>(spec.to.second))};
    od.paths = spec.paths;
    for (std::size_t t = 0; t < horizon; ++t) {
      const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / period + spec.phase;
      od.rates.push_back(std::round(spec.base * (1.0 + 0.6 * std::sin(phase)) * 100.0) / 100.0);
    }
    s.ods.push_back(std::move(od));
  }
  s.validate();
  return s;
}

Scenario vs_mini(std::uint64_t seed, std::size_t horizon) {
  Scenario s = sy_mini(seed, horizon);
  s.name = "VS-mini";
  std::vector<trip::NodeId> on_paths;
  for (const auto& od : s.ods) {
    for (const auto& p : od.paths) {
      // Interior segments only: closing an origin or destination blocks every path.
      for (std::size_t i = 1; i + 1 < p.size(); ++i) on_paths.push_back(p[i]);
    }
  }
  std::sort(on_paths.begin(), on_paths.end());
  on_paths.erase(std::unique(on_paths.begin(), on_paths.end()), on_paths.end());
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  std::uniform_int_distribution<std::size_t> pick(0, on_paths.size() - 1);
  std::uniform_int_distribution<std::size_t> duration(6, 15);
  const std::size_t count = std::max<std::size_t>(1, horizon / 30);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t d = std::min(duration(rng), horizon);
    std::uniform_int_distribution<std::size_t> start(0, horizon - d);
    const std::size_t a = start(rng);
    s.events.push_back({on_paths[pick(rng)], a, a + d, 0.1});
  }
  s.validate();
  return s;
}

}  // namespace traffnet::gen
