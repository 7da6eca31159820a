#include "traffnet/trainer/checkpoint.hpp"

#include <json.hpp>

#include "traffnet/common/error.hpp"
#include "traffnet/common/text.hpp"
#include "traffnet/tripgraph/io.hpp"

namespace traffnet::train {

namespace {

using Json = nlohmann::ordered_json;
constexpr int kSchemaVersion = 1;

Json tensor_json(const ad::Tensor& t) {
  Json j;
  j["shape"] = t.shape();
  j["values"] = std::vector<double>(t.values().begin(), t.values().end());
  return j;
}

ad::Tensor tensor_from(const Json& j) {
  return ad::Tensor(j.at("shape").get<ad::Shape>(), j.at("values").get<std::vector<double>>());
}

Json normalizer_json(const Normalizer& n) {
  Json j;
  j["volume_mean"] = n.volume_mean;
  j["volume_std"] = n.volume_std;
  j["speed_mean"] = n.speed_mean;
  j["speed_std"] = n.speed_std;
  j["demand_scale"] = n.demand_scale;
  j["output_scale"] = n.output_scale;
  return j;
}

Normalizer normalizer_from(const Json& j) {
  Normalizer n;
  j.at("volume_mean").get_to(n.volume_mean);
  j.at("volume_std").get_to(n.volume_std);
  j.at("speed_mean").get_to(n.speed_mean);
  j.at("speed_std").get_to(n.speed_std);
  j.at("demand_scale").get_to(n.demand_scale);
  j.at("output_scale").get_to(n.output_scale);
  return n;
}

}  // namespace

std::string checkpoint_to_json(const model::Forecaster& model, const Normalizer& normalizer,
                               CheckpointMeta meta, const AdamState* adam) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = model.kind();
  meta.config_hash = model::config_hash(model.config());
  doc["meta"] = {{"seed", meta.seed},
                 {"dataset_id", meta.dataset_id},
                 {"step", meta.step},
                 {"config_hash", meta.config_hash}};
  doc["config"] = Json::parse(model::to_json(model.config()));
  if (const auto* tn = dynamic_cast<const model::TraffNetModel*>(&model)) {
    doc["network"] = Json::parse(trip::network_to_json(tn->network()));
    doc["trip_graph"] = Json::parse(trip::trip_graph_to_json(tn->graph()));
  } else if (const auto* gru = dynamic_cast<const model::GruBaseline*>(&model)) {
    doc["num_nodes"] = gru->num_nodes();
  } else {
    throw ContractError("unknown forecaster kind " + model.kind());
  }
  doc["normalizer"] = normalizer_json(normalizer);
  Json params = Json::object();
  for (const auto* p : model.params().list()) params[p->name] = tensor_json(p->value);
  doc["params"] = std::move(params);
  if (adam) {
    Json a;
    a["step"] = adam->step;
    Json m = Json::object(), v = Json::object();
    for (const auto& [name, t] : adam->m) m[name] = tensor_json(t);
    for (const auto& [name, t] : adam->v) v[name] = tensor_json(t);
    a["m"] = std::move(m);
    a["v"] = std::move(v);
    doc["adam"] = std::move(a);
  }
  return doc.dump();
}

LoadedCheckpoint checkpoint_from_json(const std::string& text) {
  LoadedCheckpoint out;
  try {
    const Json doc = Json::parse(text);
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw ParseError("unsupported schema version", 0, "checkpoint.schema_version");
    }
    const auto config = model::model_config_from_json(doc.at("config").dump());
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "traffnet") {
      out.model = std::make_unique<model::TraffNetModel>(
          trip::network_from_json(doc.at("network").dump()),
          trip::trip_graph_from_json(doc.at("trip_graph").dump()), config);
    } else if (kind == "gru") {
      out.model = std::make_unique<model::GruBaseline>(doc.at("num_nodes").get<std::size_t>(), config);
    } else {
      throw ParseError("unknown model kind " + kind, 0, "checkpoint.kind");
    }
    auto& store = out.model->params();
    const auto& params = doc.at("params");
    if (params.size() != store.list().size()) {
      throw ParseError("parameter count mismatch", 0, "checkpoint.params");
    }
    for (auto* p : store.list()) {
      ad::Tensor t = tensor_from(params.at(p->name));
      if (t.shape() != p->value.shape()) {
        throw ParseError("shape mismatch for " + p->name, 0, "checkpoint.params");
      }
      p->value = std::move(t);
    }
    out.normalizer = normalizer_from(doc.at("normalizer"));
    const auto& meta = doc.at("meta");
    out.meta.seed = meta.at("seed").get<std::uint64_t>();
    out.meta.dataset_id = meta.at("dataset_id").get<std::string>();
    out.meta.step = meta.at("step").get<std::uint64_t>();
    out.meta.config_hash = meta.at("config_hash").get<std::string>();
    if (doc.contains("adam")) {
      AdamState a;
      const auto& aj = doc.at("adam");
      a.step = aj.at("step").get<std::uint64_t>();
      for (const auto& [name, t] : aj.at("m").items()) a.m.emplace(name, tensor_from(t));
      for (const auto& [name, t] : aj.at("v").items()) a.v.emplace(name, tensor_from(t));
      out.adam = std::move(a);
    }
  } catch (const Json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what(), 0, "checkpoint");
  }
  return out;
}

void save_checkpoint(const std::string& path, const model::Forecaster& model,
                     const Normalizer& normalizer, CheckpointMeta meta, const AdamState* adam) {
  write_file(path, checkpoint_to_json(model, normalizer, std::move(meta), adam));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  return checkpoint_from_json(read_file(path));
}

}  // namespace traffnet::train
