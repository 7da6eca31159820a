#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "traffnet/model/forecaster.hpp"
#include "traffnet/trainer/adam.hpp"
#include "traffnet/trainer/dataset.hpp"

namespace traffnet::train {

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::string dataset_id;
  std::uint64_t step = 0;
  std::string config_hash;  // filled on save
};

struct LoadedCheckpoint {
  std::unique_ptr<model::Forecaster> model;
  Normalizer normalizer;
  CheckpointMeta meta;
  std::optional<AdamState> adam;
};

/// JSON container: kind, model config, network and trip graph (TraffNet
/// only), named tensors, normalization statistics, metadata and optionally
/// the optimizer state. Doubles are written in shortest round-trip form.
std::string checkpoint_to_json(const model::Forecaster& model, const Normalizer& normalizer,
                               CheckpointMeta meta, const AdamState* adam = nullptr);
LoadedCheckpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const model::Forecaster& model,
                     const Normalizer& normalizer, CheckpointMeta meta,
                     const AdamState* adam = nullptr);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace traffnet::train
