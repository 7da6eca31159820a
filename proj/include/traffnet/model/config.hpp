#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace traffnet::model {

struct ForecastConfig {
  std::size_t window = 6;   // tau, history intervals per sample
  std::size_t horizon = 6;  // L, forecast intervals
  double interval_seconds = 120.0;

  bool operator==(const ForecastConfig&) const = default;
};

struct ModelConfig {
  ForecastConfig forecast;

  // Path embedding (bidirectional GRU over a path's segments).
  std::size_t gru_hidden = 16;
  std::size_t gru_layers = 2;
  /// Longest path the padded embedding can hold; 0 takes the graph's longest.
  std::size_t max_path_length = 0;

  // Route learning.
  std::size_t gat_hidden = 32;
  std::size_t gat_heads = 2;
  std::size_t route_mlp_layers = 7;
  std::size_t route_mlp_hidden = 32;
  double leaky_slope = 0.01;
  /// Scale the attended embedding instead of the raw path embedding.
  bool assign_uses_attended = false;
  /// Score [H'_j, H_j] instead of H'_j alone. Every path of an OD attends to
  /// the same neighbour set, so H'_j differs between paths only through the
  /// LeakyReLU; without the path's own embedding the shares stay near uniform.
  bool route_skip = true;

  // Temporal module and output head.
  std::size_t temporal_hidden = 64;
  std::size_t temporal_layers = 2;
  std::size_t head_mlp_layers = 3;
  /// Feed zeros to the decoder instead of re-feeding the last observed input.
  bool zero_input_decoder = false;

  // Ablations.
  bool no_od = false;  // every OD demand forced to 1
  bool no_tf = false;  // dynamic segment features forced to 0

  std::uint64_t seed = 7;

  bool operator==(const ModelConfig&) const = default;
};

std::string to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const std::string& text);
/// Stable digest of the serialized config, used as run metadata.
std::string config_hash(const ModelConfig& config);

}  // namespace traffnet::model
