#include "traffnet/trainer/online.hpp"

#include "traffnet/common/error.hpp"
#include "traffnet/trainer/loss.hpp"

namespace traffnet::train {

OnlineLearner::OnlineLearner(model::Forecaster& model, Normalizer normalizer, OnlineConfig config,
                             AdamState adam)
    : model_(model),
      normalizer_(std::move(normalizer)),
      config_(config),
      adam_(std::move(adam)),
      window_(model.config().forecast.window),
      horizon_(model.config().forecast.horizon) {
  if (config_.phi == 0) throw ContractError("update period must be positive");
}

OnlineStep OnlineLearner::ingest(const RawInterval& observation, std::vector<bool> affected) {
  features_.push_back(normalizer_.features(observation));
  raw_.push_back(observation);
  targets_.push_back(normalizer_.scale_target(observation.volume));
  if (!affected.empty() && affected.size() != observation.volume.size()) {
    throw DimensionError("affected mask does not match the node count");
  }
  affected_.push_back(std::move(affected));

  OnlineStep step;
  step.t = t();
  step.warm_up = !warm();
  if (!step.warm_up) accumulated_.push_back(t() - horizon_ - window_);
  if (config_.updates_enabled && t() % config_.phi == 0 && !accumulated_.empty()) {
    update();
    step.updated = true;
  }
  step.version = version();
  if (!step.warm_up) {
    last_forecast_ = forecast_from(std::span<const RawInterval>(raw_).last(window_));
    step.forecast = last_forecast_;
  }
  return step;
}

void OnlineLearner::update() {
  auto& store = model_.params();
  for (std::size_t s = 0; s < config_.steps_per_update; ++s) {
    store.zero_grad();
    ad::Tape tape;
    model::ParamBinder bind(tape);
    std::vector<ad::Var> encoded(features_.size());
    ad::Var total;
    for (const std::size_t a : accumulated_) {
      std::vector<ad::Var> window;
      for (std::size_t t = a; t < a + window_; ++t) {
        if (!encoded[t].valid()) encoded[t] = model_.encode_interval(bind, features_[t]);
        window.push_back(encoded[t]);
      }
      const auto pred = model_.forecast(bind, window);
      std::vector<const std::vector<double>*> targets;
      std::vector<const std::vector<bool>*> masks;
      for (std::size_t t = a + window_; t < a + window_ + horizon_; ++t) {
        targets.push_back(&targets_[t]);
        masks.push_back(&affected_[t]);
      }
      const ad::Var l = forecast_loss(pred, targets, masks, config_.event_beta);
      total = total.valid() ? total + l : l;
    }
    total = ad::scale(total, 1.0 / static_cast<double>(accumulated_.size()));
    tape.backward(total);
    adam_step(store, adam_, config_.adam);
  }
  accumulated_.clear();
  ++updates_;
}

std::vector<std::vector<double>> OnlineLearner::forecast_from(
    std::span<const RawInterval> window) const {
  if (window.size() != window_) throw ContractError("forecast window has the wrong length");
  std::vector<model::IntervalFeatures> feats;
  for (const auto& raw : window) feats.push_back(normalizer_.features(raw));
  std::vector<const model::IntervalFeatures*> ptrs;
  for (const auto& f : feats) ptrs.push_back(&f);
  ad::Tape tape(false);
  model::ParamBinder bind(tape);
  std::vector<std::vector<double>> out;
  for (const auto& y : model_.forward(bind, ptrs)) {
    out.push_back(normalizer_.unscale_output(y.value().values()));
  }
  return out;
}

}  // namespace traffnet::train
