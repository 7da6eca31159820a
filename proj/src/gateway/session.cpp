#include "traffnet/gateway/session.hpp"

#include <json.hpp>

#include "traffnet/common/error.hpp"
#include "traffnet/trainer/dataset.hpp"

namespace traffnet::gateway {

namespace {

using Json = nlohmann::ordered_json;

Json envelope() {
  Json j;
  j["schema_version"] = kApiSchemaVersion;
  return j;
}

Response error(int status, const std::string& message) {
  Json j = envelope();
  j["error"] = message;
  return {status, j.dump()};
}

}  // namespace

WhatIfRequest parse_whatif(const std::string& body, const trip::RoadNetwork& net,
                           std::size_t max_horizon) {
  const Json doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw ContractError("body is not a JSON object");
  if (!doc.contains("events") || !doc["events"].is_array()) {
    throw ContractError("'events' must be an array");
  }
  WhatIfRequest req;
  for (const auto& e : doc["events"]) {
    if (!e.is_object() || !e.contains("segment") || !e["segment"].is_number_unsigned()) {
      throw ContractError("each event needs a non-negative integer 'segment'");
    }
    WhatIfEvent ev;
    ev.segment = e["segment"].get<trip::NodeId>();
    if (e.contains("capacity_factor")) {
      if (!e["capacity_factor"].is_number()) throw ContractError("'capacity_factor' must be a number");
      ev.capacity_factor = e["capacity_factor"].get<double>();
    }
    if (!(ev.capacity_factor > 0.0 && ev.capacity_factor <= 1.0)) {
      throw ContractError("'capacity_factor' must be in (0, 1]");
    }
    if (e.contains("start") != e.contains("end")) throw ContractError("give both 'start' and 'end' or neither");
    if (e.contains("start")) {
      if (!e["start"].is_number_unsigned() || !e["end"].is_number_unsigned()) {
        throw ContractError("'start' and 'end' must be non-negative integers");
      }
      ev.start = e["start"].get<std::size_t>();
      ev.end = e["end"].get<std::size_t>();
      if (!(*ev.start < *ev.end)) throw ContractError("event needs start < end");
    }
    if (ev.segment >= net.size()) {
      throw ValidationError("unknown segment " + std::to_string(ev.segment));
    }
    req.events.push_back(ev);
  }
  if (doc.contains("horizon") && !doc["horizon"].is_null()) {
    if (!doc["horizon"].is_number_unsigned()) throw ContractError("'horizon' must be a positive integer");
    const auto h = doc["horizon"].get<std::size_t>();
    if (h == 0 || h > max_horizon) {
      throw ContractError("'horizon' must be between 1 and " + std::to_string(max_horizon));
    }
    req.horizon = h;
  }
  return req;
}

Session::Session(train::LoadedCheckpoint checkpoint, trip::RoadNetwork net, trip::TripGraph graph,
                 trip::DemandVolumePanel stream, std::vector<std::vector<bool>> affected,
                 SessionConfig config)
    : checkpoint_(std::move(checkpoint)),
      net_(std::move(net)),
      graph_(std::move(graph)),
      stream_(std::move(stream)),
      affected_(std::move(affected)),
      config_(config) {
  if (stream_.num_nodes != net_.size()) throw DimensionError("stream and network sizes disagree");
  if (!affected_.empty() && affected_.size() != stream_.num_intervals()) {
    throw DimensionError("affected mask and stream lengths disagree");
  }
  train::OnlineConfig oc;
  oc.phi = config_.phi;
  oc.adam = config_.adam;
  oc.updates_enabled = config_.online_updates;
  learner_ = std::make_unique<train::OnlineLearner>(*checkpoint_.model, checkpoint_.normalizer, oc,
                                                    checkpoint_.adam.value_or(train::AdamState{}));
}

std::size_t Session::cursor() const {
  std::lock_guard lock(mu_);
  return learner_->t();
}

std::size_t Session::version() const {
  std::lock_guard lock(mu_);
  return learner_->version();
}

Response Session::network() const {
  std::lock_guard lock(mu_);
  Json j = envelope();
  Json nodes = Json::array();
  for (const auto& n : net_.nodes()) {
    nodes.push_back({{"id", n.id},
                     {"length", n.length},
                     {"capacity", n.capacity},
                     {"free_speed", n.free_speed},
                     {"x", n.centroid.x},
                     {"y", n.centroid.y}});
  }
  j["nodes"] = std::move(nodes);
  Json edges = Json::array();
  for (const auto& [a, b] : net_.edges()) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  Json ods = Json::array();
  for (const auto& od : graph_.od_nodes) {
    ods.push_back({{"id", od.od_id},
                   {"origin", od.origin},
                   {"destination", od.destination},
                   {"paths", graph_.paths_of(od.od_id)}});
  }
  j["ods"] = std::move(ods);
  Json paths = Json::array();
  for (const auto& p : graph_.path_nodes) {
    paths.push_back({{"id", p.path_id}, {"od", p.od_id}, {"segments", p.segment_seq}});
  }
  j["paths"] = std::move(paths);
  const auto& fc = checkpoint_.model->config().forecast;
  j["window"] = fc.window;
  j["horizon"] = fc.horizon;
  j["interval_seconds"] = stream_.interval_seconds;
  return {200, j.dump()};
}

Response Session::state() const {
  std::lock_guard lock(mu_);
  Json j = envelope();
  const std::size_t t = learner_->t();
  j["t"] = t;
  j["stream_length"] = stream_.num_intervals();
  j["warm"] = learner_->warm();
  j["model_version"] = learner_->version();
  j["updates"] = learner_->updates();
  j["online_updates"] = config_.online_updates;
  j["phi"] = config_.phi;
  j["accumulated"] = learner_->accumulated();
  j["volumes"] = t > 0 ? learner_->observation(t - 1).volume : std::vector<double>{};
  return {200, j.dump()};
}

Response Session::warm_up_error() const {
  const auto& fc = checkpoint_.model->config().forecast;
  Json j = envelope();
  j["error"] = "warm-up: " + std::to_string(learner_->t()) + " of " +
               std::to_string(fc.window + fc.horizon) + " intervals buffered";
  j["t"] = learner_->t();
  j["model_version"] = learner_->version();
  return {409, j.dump()};
}

Response Session::step() {
  std::lock_guard lock(mu_);
  const std::size_t t = learner_->t();
  if (t >= stream_.num_intervals()) return error(409, "stream exhausted");
  const auto raw = train::raw_interval(stream_, graph_, t);
  const auto s = learner_->ingest(raw, affected_.empty() ? std::vector<bool>{} : affected_[t]);
  if (s.warm_up) return warm_up_error();
  Json j = envelope();
  j["t"] = s.t;
  j["model_version"] = s.version;
  j["updated"] = s.updated;
  j["forecast"] = s.forecast;
  return {200, j.dump()};
}

Response Session::forecast() const {
  std::lock_guard lock(mu_);
  if (!learner_->warm()) return warm_up_error();
  Json j = envelope();
  j["t"] = learner_->t();
  j["model_version"] = learner_->version();
  j["horizon"] = learner_->last_forecast().size();
  j["forecast"] = learner_->last_forecast();
  return {200, j.dump()};
}

Response Session::whatif(const std::string& body) const {
  std::lock_guard lock(mu_);
  const auto& fc = checkpoint_.model->config().forecast;
  WhatIfRequest req;
  try {
    req = parse_whatif(body, net_, fc.horizon);
  } catch (const ValidationError& e) {
    return error(404, e.what());
  } catch (const ContractError& e) {
    return error(400, e.what());
  }
  if (!learner_->warm()) return warm_up_error();

  const std::size_t t = learner_->t();
  std::vector<train::RawInterval> base, scenario;
  for (std::size_t u = t - fc.window; u < t; ++u) base.push_back(learner_->observation(u));
  scenario = base;
  for (const auto& ev : req.events) {
    for (std::size_t k = 0; k < scenario.size(); ++k) {
      const std::size_t u = t - fc.window + k;
      if (ev.start && (u < *ev.start || u >= *ev.end)) continue;
      scenario[k].volume[ev.segment] *= ev.capacity_factor;
      scenario[k].speed[ev.segment] *= ev.capacity_factor;
    }
  }
  auto baseline = learner_->forecast_from(base);
  auto predicted = learner_->forecast_from(scenario);
  const std::size_t h = req.horizon.value_or(fc.horizon);
  baseline.resize(h);
  predicted.resize(h);

  Json j = envelope();
  j["t"] = t;
  j["model_version"] = learner_->version();
  j["horizon"] = h;
  Json events = Json::array();
  for (const auto& ev : req.events) {
    Json e = {{"segment", ev.segment}, {"capacity_factor", ev.capacity_factor}};
    if (ev.start) {
      e["start"] = *ev.start;
      e["end"] = *ev.end;
    }
    events.push_back(std::move(e));
  }
  j["events"] = std::move(events);
  j["baseline"] = baseline;
  j["forecast"] = predicted;
  return {200, j.dump()};
}

}  // namespace traffnet::gateway
