#include "traffnet/model/config.hpp"

#include <cstdio>

#include <json.hpp>

#include "traffnet/common/error.hpp"

namespace traffnet::model {

using Json = nlohmann::ordered_json;

std::string to_json(const ModelConfig& c) {
  Json j;
  j["window"] = c.forecast.window;
  j["horizon"] = c.forecast.horizon;
  j["interval_seconds"] = c.forecast.interval_seconds;
  j["gru_hidden"] = c.gru_hidden;
  j["gru_layers"] = c.gru_layers;
  j["max_path_length"] = c.max_path_length;
  j["gat_hidden"] = c.gat_hidden;
  j["gat_heads"] = c.gat_heads;
  j["route_mlp_layers"] = c.route_mlp_layers;
  j["route_mlp_hidden"] = c.route_mlp_hidden;
  j["leaky_slope"] = c.leaky_slope;
  j["assign_uses_attended"] = c.assign_uses_attended;
  j["route_skip"] = c.route_skip;
  j["temporal_hidden"] = c.temporal_hidden;
  j["temporal_layers"] = c.temporal_layers;
  j["head_mlp_layers"] = c.head_mlp_layers;
  j["zero_input_decoder"] = c.zero_input_decoder;
  j["no_od"] = c.no_od;
  j["no_tf"] = c.no_tf;
  j["seed"] = c.seed;
  return j.dump();
}

ModelConfig model_config_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ParseError(e.what(), 0, "model_config");
  }
  ModelConfig c;
  auto read = [&](const char* key, auto& target) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(target);
    } catch (const Json::exception&) {
      throw ParseError("wrong type", 0, std::string("model_config.") + key);
    }
  };
  read("window", c.forecast.window);
  read("horizon", c.forecast.horizon);
  read("interval_seconds", c.forecast.interval_seconds);
  read("gru_hidden", c.gru_hidden);
  read("gru_layers", c.gru_layers);
  read("max_path_length", c.max_path_length);
  read("gat_hidden", c.gat_hidden);
  read("gat_heads", c.gat_heads);
  read("route_mlp_layers", c.route_mlp_layers);
  read("route_mlp_hidden", c.route_mlp_hidden);
  read("leaky_slope", c.leaky_slope);
  read("assign_uses_attended", c.assign_uses_attended);
  read("route_skip", c.route_skip);
  read("temporal_hidden", c.temporal_hidden);
  read("temporal_layers", c.temporal_layers);
  read("head_mlp_layers", c.head_mlp_layers);
  read("zero_input_decoder", c.zero_input_decoder);
  read("no_od", c.no_od);
  read("no_tf", c.no_tf);
  read("seed", c.seed);
  if (c.forecast.window == 0 || c.forecast.horizon == 0) {
    throw ParseError("window and horizon must be at least 1", 0, "model_config");
  }
  return c;
}

std::string config_hash(const ModelConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char ch : to_json(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace traffnet::model
