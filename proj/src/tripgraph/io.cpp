#include "traffnet/tripgraph/io.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "traffnet/common/error.hpp"
#include "traffnet/common/text.hpp"

namespace traffnet::trip {

using Json = nlohmann::ordered_json;

namespace {

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
    throw ParseError(e.what(), line, "");
  }
}

const Json& field(const Json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw ParseError("missing field", 0, where + "." + key);
  }
  return obj.at(key);
}

template <typename T>
T get(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  try {
    return v.get<T>();
  } catch (const Json::exception&) {
    throw ParseError("wrong type", 0, where + "." + key);
  }
}

const Json& array_field(const Json& obj, const char* key, const std::string& where) {
  const Json& v = field(obj, key, where);
  if (!v.is_array()) throw ParseError("expected an array", 0, where + "." + key);
  return v;
}

void check_schema(const Json& doc, const char* kind) {
  if (get<int>(doc, "schema_version", kind) != kSchemaVersion) {
    throw ParseError("unsupported schema version", 0, std::string(kind) + ".schema_version");
  }
}

std::string kind_name(NodeKind k) { return k == NodeKind::kGrid ? "grid" : "segment"; }

NodeKind kind_from(const std::string& s, const std::string& where) {
  if (s == "segment") return NodeKind::kSegment;
  if (s == "grid") return NodeKind::kGrid;
  throw ParseError("unknown node kind '" + s + "'", 0, where);
}

Json network_json(const RoadNetwork& net) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  Json nodes = Json::array();
  for (const RoadNode& n : net.nodes()) {
    Json j;
    j["id"] = n.id;
    j["kind"] = kind_name(n.kind);
    j["length"] = n.length;
    j["capacity"] = n.capacity;
    j["free_speed"] = n.free_speed;
    j["centroid"] = {n.centroid.x, n.centroid.y};
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& [a, b] : net.edges()) edges.push_back({a, b});
  doc["edges"] = std::move(edges);
  return doc;
}

RoadNetwork network_from(const Json& doc) {
  check_schema(doc, "network");
  std::vector<RoadNode> nodes;
  const Json& jn = array_field(doc, "nodes", "network");
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string where = "network.nodes[" + std::to_string(i) + "]";
    RoadNode n;
    n.id = get<std::size_t>(jn[i], "id", where);
    n.kind = kind_from(get<std::string>(jn[i], "kind", where), where + ".kind");
    n.length = get<double>(jn[i], "length", where);
    n.capacity = get<double>(jn[i], "capacity", where);
    n.free_speed = get<double>(jn[i], "free_speed", where);
    const auto c = get<std::vector<double>>(jn[i], "centroid", where);
    if (c.size() != 2) throw ParseError("centroid needs two coordinates", 0, where + ".centroid");
    n.centroid = {c[0], c[1]};
    nodes.push_back(n);
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  const Json& je = array_field(doc, "edges", "network");
  for (std::size_t i = 0; i < je.size(); ++i) {
    const std::string where = "network.edges[" + std::to_string(i) + "]";
    try {
      const auto e = je[i].get<std::vector<NodeId>>();
      if (e.size() != 2) throw ParseError("edge needs two endpoints", 0, where);
      edges.emplace_back(e[0], e[1]);
    } catch (const Json::exception&) {
      throw ParseError("wrong type", 0, where);
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

}  // namespace

std::string network_to_json(const RoadNetwork& net) { return network_json(net).dump(1) + "\n"; }

RoadNetwork network_from_json(const std::string& text) { return network_from(parse_json(text)); }

void save_network(const RoadNetwork& net, const std::string& path) {
  write_file(path, network_to_json(net));
}

RoadNetwork load_network(const std::string& path) { return network_from_json(read_file(path)); }

std::string trip_graph_to_json(const TripGraph& g) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  Json ods = Json::array();
  for (const OdNode& n : g.od_nodes) {
    ods.push_back({{"od_id", n.od_id}, {"origin", n.origin}, {"destination", n.destination}});
  }
  doc["od_nodes"] = std::move(ods);
  Json paths = Json::array();
  for (const PathNode& p : g.path_nodes) {
    paths.push_back({{"path_id", p.path_id}, {"od_id", p.od_id}, {"segment_seq", p.segment_seq}});
  }
  doc["path_nodes"] = std::move(paths);
  Json segs = Json::array();
  for (const SegmentNode& s : g.segment_nodes) {
    segs.push_back({{"node_id", s.node_id},
                    {"length", s.length},
                    {"capacity", s.capacity},
                    {"free_speed", s.free_speed}});
  }
  doc["segment_nodes"] = std::move(segs);
  Json r = Json::array();
  for (const OdPathEdge& e : g.edges_r) r.push_back({e.od_id, e.path_id});
  doc["edges_r"] = std::move(r);
  Json rp = Json::array();
  for (const PathSegmentEdge& e : g.edges_rprime) rp.push_back({e.path_id, e.node_id, e.order});
  doc["edges_rprime"] = std::move(rp);
  return doc.dump(1) + "\n";
}

TripGraph trip_graph_from_json(const std::string& text) {
  const Json doc = parse_json(text);
  check_schema(doc, "trip_graph");
  TripGraph g;
  const Json& ods = array_field(doc, "od_nodes", "trip_graph");
  for (std::size_t i = 0; i < ods.size(); ++i) {
    const std::string where = "trip_graph.od_nodes[" + std::to_string(i) + "]";
    g.od_nodes.push_back({get<std::size_t>(ods[i], "od_id", where),
                          get<NodeId>(ods[i], "origin", where),
                          get<NodeId>(ods[i], "destination", where)});
  }
  const Json& paths = array_field(doc, "path_nodes", "trip_graph");
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::string where = "trip_graph.path_nodes[" + std::to_string(i) + "]";
    g.path_nodes.push_back({get<std::size_t>(paths[i], "path_id", where),
                            get<std::size_t>(paths[i], "od_id", where),
                            get<std::vector<NodeId>>(paths[i], "segment_seq", where)});
  }
  const Json& segs = array_field(doc, "segment_nodes", "trip_graph");
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const std::string where = "trip_graph.segment_nodes[" + std::to_string(i) + "]";
    g.segment_nodes.push_back({get<NodeId>(segs[i], "node_id", where),
                               get<double>(segs[i], "length", where),
                               get<double>(segs[i], "capacity", where),
                               get<double>(segs[i], "free_speed", where)});
  }
  auto tuple_of = [](const Json& j, std::size_t n, const std::string& where) {
    try {
      auto v = j.get<std::vector<std::size_t>>();
      if (v.size() != n) throw ParseError("expected " + std::to_string(n) + " entries", 0, where);
      return v;
    } catch (const Json::exception&) {
      throw ParseError("wrong type", 0, where);
    }
  };
  const Json& r = array_field(doc, "edges_r", "trip_graph");
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto v = tuple_of(r[i], 2, "trip_graph.edges_r[" + std::to_string(i) + "]");
    g.edges_r.push_back({v[0], v[1]});
  }
  const Json& rp = array_field(doc, "edges_rprime", "trip_graph");
  for (std::size_t i = 0; i < rp.size(); ++i) {
    const auto v = tuple_of(rp[i], 3, "trip_graph.edges_rprime[" + std::to_string(i) + "]");
    g.edges_rprime.push_back({v[0], v[1], v[2]});
  }
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0, "trip_graph");
  }
  return g;
}

void save_trip_graph(const TripGraph& graph, const std::string& path) {
  write_file(path, trip_graph_to_json(graph));
}

TripGraph load_trip_graph(const std::string& path) { return trip_graph_from_json(read_file(path)); }

std::string trajectories_to_csv(const std::vector<Trajectory>& trajectories) {
  std::string out = "vehicle_id,timestamp,x,y\n";
  for (const Trajectory& t : trajectories) {
    for (const TrajectoryPoint& p : t.points) {
      out += t.vehicle_id;
      out += ',';
      out += format_double(p.timestamp);
      out += ',';
      out += format_double(p.position.x);
      out += ',';
      out += format_double(p.position.y);
      out += '\n';
    }
  }
  return out;
}

std::vector<Trajectory> trajectories_from_csv(const std::string& text) {
  std::vector<Trajectory> out;
  std::map<std::string, std::size_t, std::less<>> index;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("vehicle_id", 0) == 0) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 4) {
      throw ParseError("expected 4 comma-separated fields", line_no, "record");
    }
    const std::string id(cols[0]);
    if (id.empty()) throw ParseError("empty vehicle id", line_no, "vehicle_id");
    TrajectoryPoint p;
    p.timestamp = parse_double(cols[1], line_no, "timestamp");
    p.position.x = parse_double(cols[2], line_no, "x");
    p.position.y = parse_double(cols[3], line_no, "y");
    auto [it, inserted] = index.try_emplace(id, out.size());
    if (inserted) out.push_back({id, {}});
    Trajectory& t = out[it->second];
    if (!t.points.empty() && !(p.timestamp > t.points.back().timestamp)) {
      throw ParseError("timestamps of '" + id + "' are not strictly increasing", line_no,
                       "timestamp");
    }
    t.points.push_back(p);
  }
  return out;
}

std::string grid_to_csv(const std::vector<std::vector<double>>& grid, std::size_t columns) {
  std::string out = "interval";
  for (std::size_t i = 0; i < columns; ++i) out += ",n" + std::to_string(i);
  out += '\n';
  for (std::size_t t = 0; t < grid.size(); ++t) {
    out += std::to_string(t);
    for (double v : grid[t]) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<std::vector<double>> grid_from_csv(const std::string& text) {
  std::vector<std::vector<double>> grid;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (line_no == 1) {
      columns = cols.size() - 1;
      continue;
    }
    if (cols.size() != columns + 1) {
      throw ParseError("expected " + std::to_string(columns + 1) + " fields", line_no, "row");
    }
    if (static_cast<std::size_t>(parse_int(cols[0], line_no, "interval")) != grid.size()) {
      throw ParseError("intervals must be consecutive from 0", line_no, "interval");
    }
    std::vector<double> row;
    row.reserve(columns);
    for (std::size_t i = 1; i < cols.size(); ++i) {
      row.push_back(parse_double(cols[i], line_no, "n" + std::to_string(i - 1)));
    }
    grid.push_back(std::move(row));
  }
  return grid;
}

std::string od_series_to_csv(const DemandVolumePanel& panel) {
  std::string out = "interval,origin,destination,count\n";
  for (std::size_t t = 0; t < panel.od_series.size(); ++t) {
    for (const auto& [od, count] : panel.od_series[t]) {
      out += std::to_string(t) + "," + std::to_string(od.origin) + "," +
             std::to_string(od.destination) + "," + format_double(count) + "\n";
    }
  }
  return out;
}

void save_panel(const DemandVolumePanel& panel, const std::string& directory) {
  std::filesystem::create_directories(directory);
  const std::filesystem::path dir(directory);
  Json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["interval_seconds"] = panel.interval_seconds;
  meta["num_nodes"] = panel.num_nodes;
  meta["num_intervals"] = panel.num_intervals();
  write_file((dir / "panel.json").string(), meta.dump(1) + "\n");
  write_file((dir / "volume.csv").string(), grid_to_csv(panel.volume_series, panel.num_nodes));
  write_file((dir / "speed.csv").string(), grid_to_csv(panel.speed_series, panel.num_nodes));
  write_file((dir / "od.csv").string(), od_series_to_csv(panel));
}

DemandVolumePanel load_panel(const std::string& directory) {
  const std::filesystem::path dir(directory);
  const Json meta = parse_json(read_file((dir / "panel.json").string()));
  check_schema(meta, "panel");
  const auto count = get<std::size_t>(meta, "num_intervals", "panel");
  DemandVolumePanel panel = make_empty_panel(count, get<std::size_t>(meta, "num_nodes", "panel"),
                                             get<double>(meta, "interval_seconds", "panel"));
  panel.volume_series = grid_from_csv(read_file((dir / "volume.csv").string()));
  panel.speed_series = grid_from_csv(read_file((dir / "speed.csv").string()));

  std::istringstream in(read_file((dir / "od.csv").string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 4) throw ParseError("expected 4 fields", line_no, "od");
    const auto t = static_cast<std::size_t>(parse_int(cols[0], line_no, "interval"));
    if (t >= count) throw ParseError("interval out of range", line_no, "interval");
    const OdPair od{static_cast<NodeId>(parse_int(cols[1], line_no, "origin")),
                    static_cast<NodeId>(parse_int(cols[2], line_no, "destination"))};
    panel.od_series[t][od] = parse_double(cols[3], line_no, "count");
  }
  try {
    panel.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), 0, "panel");
  }
  return panel;
}

}  // namespace traffnet::trip
