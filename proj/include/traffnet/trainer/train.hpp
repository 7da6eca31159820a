#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "traffnet/common/error.hpp"
#include "traffnet/model/forecaster.hpp"
#include "traffnet/trainer/adam.hpp"
#include "traffnet/trainer/dataset.hpp"

namespace traffnet::train {

/// Training stopped on a non-finite value.
class TrainingError : public Error {
 public:
  using Error::Error;
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 8;
  std::size_t max_epochs = 50;
  std::size_t max_steps = 0;  // 0: bounded by epochs only
  std::size_t patience = 20;  // validation checks without improvement
  double event_beta = 1.0;
  std::uint64_t seed = 7;
  /// Restore the best-validation parameters at the end.
  bool keep_best = true;
};

/// Optimizer position; resuming from a saved state replays the same batches.
struct TrainState {
  AdamState adam;
  std::size_t step = 0;
};

struct CurvePoint {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;  // NaN between validation checks
};

struct TrainResult {
  std::vector<CurvePoint> curve;
  double best_validation = 0.0;
  std::size_t best_step = 0;
  std::size_t steps = 0;
  bool early_stopped = false;
};

using ParamSnapshot = std::map<std::string, ad::Tensor>;
ParamSnapshot snapshot(const model::ParamStore& store);
void restore(model::ParamStore& store, const ParamSnapshot& snap);

/// Training samples grouped into consecutive runs of batch_size.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& samples,
                                                   std::size_t batch_size);

/// Loss of one batch on a fresh tape; accumulates gradients into the model's
/// parameters when `backward` is set.
double batch_loss(model::Forecaster& model, const Dataset& data,
                  const std::vector<std::size_t>& batch, double beta, bool backward);

/// Mean per-sample loss over a split.
double evaluate_loss(const model::Forecaster& model, const Dataset& data, Split split,
                     double beta);

/// Fine-tunes every parameter with Adam on forecast loss (event-weighted
/// when beta != 1 and the dataset has an event mask). Keeps the parameters
/// with the best validation loss.
TrainResult offline_train(model::Forecaster& model, const Dataset& data,
                          const TrainConfig& config, TrainState& state);

std::string curve_to_csv(const TrainResult& result);

/// Forecasts in raw volume units, [sample][horizon][node].
std::vector<std::vector<std::vector<double>>> predict(const model::Forecaster& model,
                                                      const Dataset& data,
                                                      const std::vector<std::size_t>& starts);

struct PretrainConfig {
  AdamConfig adam;
  std::size_t epochs = 30;
  std::size_t batch_size = 8;
  std::uint64_t seed = 7;
};

struct PretrainResult {
  std::vector<double> epoch_losses;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  /// No OD has more than one path; shares are fixed at 1.
  bool degenerate = false;
};

/// Path-volume loss for one interval: predicted volume of path j is
/// demand_k * co_j (true demand, scaled) against path_volumes / demand_scale.
ad::Var route_loss(const model::TraffNetModel& model, model::ParamBinder& bind,
                   const model::IntervalFeatures& features,
                   const std::vector<double>& path_volumes, double demand_scale);

/// Adam on causal-encoder parameters over training-split intervals.
/// path_volumes is [interval][path].
PretrainResult pretrain_route(model::TraffNetModel& model, const Dataset& data,
                              const std::vector<std::vector<double>>& path_volumes,
                              const PretrainConfig& config);

/// Route shares per interval per OD (over graph.paths_of(od)).
std::vector<std::vector<std::vector<double>>> predict_route_shares(
    const model::TraffNetModel& model, const Dataset& data, const std::vector<std::size_t>& intervals);

}  // namespace traffnet::train
