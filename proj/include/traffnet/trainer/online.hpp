#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "traffnet/model/forecaster.hpp"
#include "traffnet/trainer/adam.hpp"
#include "traffnet/trainer/dataset.hpp"

namespace traffnet::train {

struct OnlineConfig {
  std::size_t phi = 12;  // update period in intervals
  AdamConfig adam;
  std::size_t steps_per_update = 1;
  double event_beta = 1.0;
  bool updates_enabled = true;
};

struct OnlineStep {
  std::size_t t = 0;        // intervals ingested so far
  bool warm_up = true;      // fewer than window + horizon intervals buffered
  bool updated = false;     // parameters changed at this step
  std::size_t version = 0;  // model version after this step
  /// Raw volumes for the next horizon intervals, [horizon][node]; empty
  /// during warm-up.
  std::vector<std::vector<double>> forecast;
};

/// Streaming loop: buffer each arriving interval, accumulate the sample whose
/// targets just completed, and every phi intervals take Adam steps on the
/// accumulated samples and clear them.
class OnlineLearner {
 public:
  OnlineLearner(model::Forecaster& model, Normalizer normalizer, OnlineConfig config,
                AdamState adam = {});

  OnlineStep ingest(const RawInterval& observation, std::vector<bool> affected = {});

  std::size_t t() const { return features_.size(); }
  std::size_t updates() const { return updates_; }
  std::size_t version() const { return updates_; }
  std::size_t accumulated() const { return accumulated_.size(); }
  bool warm() const { return t() >= window_ + horizon_; }
  const std::vector<std::vector<double>>& last_forecast() const { return last_forecast_; }
  const RawInterval& observation(std::size_t t) const { return raw_.at(t); }
  const Normalizer& normalizer() const { return normalizer_; }
  const OnlineConfig& config() const { return config_; }
  const model::Forecaster& model() const { return model_; }

  /// Forecast from an explicit window of raw observations with the current
  /// parameters; does not touch the learner's state.
  std::vector<std::vector<double>> forecast_from(std::span<const RawInterval> window) const;

 private:
  void update();

  model::Forecaster& model_;
  Normalizer normalizer_;
  OnlineConfig config_;
  AdamState adam_;
  std::size_t window_;
  std::size_t horizon_;
  std::size_t updates_ = 0;
  std::vector<RawInterval> raw_;
  std::vector<model::IntervalFeatures> features_;
  std::vector<std::vector<double>> targets_;
  std::vector<std::vector<bool>> affected_;
  std::vector<std::size_t> accumulated_;  // sample start indices
  std::vector<std::vector<double>> last_forecast_;
};

}  // namespace traffnet::train
