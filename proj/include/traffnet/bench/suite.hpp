#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "traffnet/bench/metrics.hpp"
#include "traffnet/model/forecaster.hpp"
#include "traffnet/trafficgen/generator.hpp"
#include "traffnet/trainer/dataset.hpp"
#include "traffnet/trainer/train.hpp"

namespace traffnet::bench {

enum class Variant { kTraffNet, kNoOd, kNoTf, kHa, kGru };

std::string variant_name(Variant v);
/// Accepts the names variant_name produces; throws ContractError otherwise.
Variant variant_from_name(const std::string& name);
const std::vector<Variant>& all_variants();
bool trainable(Variant v);

/// Scenario shares re-indexed to trip-graph ODs and their paths_of order,
/// [t][graph od][path]. Graph paths the scenario does not list get share 0;
/// graph ODs absent from the scenario get a uniform row.
Forecasts align_route_shares(const gen::Scenario& scenario, const gen::GroundTruth& truth,
                             const trip::TripGraph& graph);

struct SuiteInputs {
  const trip::RoadNetwork* net = nullptr;
  const trip::TripGraph* graph = nullptr;
  const trip::DemandVolumePanel* panel = nullptr;
  std::vector<std::vector<bool>> affected;              // [t][node], optional
  std::vector<std::vector<double>> path_volumes;        // [t][graph path], optional
  Forecasts true_shares;                                // [t][graph od][path], optional
  std::string dataset_id;
};

struct SuiteConfig {
  model::ModelConfig model;
  train::TrainConfig train;
  train::PretrainConfig pretrain;
  bool pretrain_route = true;
  std::vector<Variant> variants = all_variants();
};

struct VariantModel {
  std::unique_ptr<model::Forecaster> model;
  std::optional<train::PretrainResult> pretrain;
  train::TrainResult training;
  train::TrainState state;
};

/// Builds the variant's model from config.model (with the ablation flag
/// set), pretrains the route module when path volumes are available, then
/// trains on the forecast loss.
VariantModel train_variant(Variant v, const SuiteInputs& inputs, const train::Dataset& data,
                           const SuiteConfig& config);

struct MetricsRow {
  std::string variant;
  std::string subset;  // "all" or "affected"
  std::size_t horizon = 0;
  HorizonMetrics metrics;
};

struct MetricsReport {
  std::vector<MetricsRow> rows;
  std::optional<ShareAccuracy> route_accuracy;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string dataset_id;

  const MetricsRow& row(const std::string& variant, const std::string& subset,
                        std::size_t horizon) const;
};

/// Raw-volume forecasts of a variant over the given sample starts; HA needs
/// no model.
Forecasts variant_forecasts(Variant v, const model::Forecaster* model, const train::Dataset& data,
                            const std::vector<std::size_t>& starts);
/// Observed raw volumes for the same samples.
Forecasts observed(const train::Dataset& data, const std::vector<std::size_t>& starts);

/// Evaluates every configured variant on the test split. Trainable variants
/// must be present in `models`; a missing one raises ContractError.
MetricsReport run_suite(const train::Dataset& data, const SuiteConfig& config,
                        const std::map<Variant, const model::Forecaster*>& models,
                        const Forecasts& true_shares = {}, const std::string& dataset_id = "");

std::string report_to_csv(const MetricsReport& report);
std::string report_to_json(const MetricsReport& report);

}  // namespace traffnet::bench
