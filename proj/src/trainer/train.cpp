#include "traffnet/trainer/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "traffnet/common/text.hpp"
#include "traffnet/trainer/loss.hpp"

namespace traffnet::train {

ParamSnapshot snapshot(const model::ParamStore& store) {
  ParamSnapshot snap;
  for (const auto* p : store.list()) snap.emplace(p->name, p->value);
  return snap;
}

void restore(model::ParamStore& store, const ParamSnapshot& snap) {
  for (auto* p : store.list()) {
    const auto it = snap.find(p->name);
    if (it == snap.end()) throw ContractError("snapshot lacks parameter " + p->name);
    if (it->second.shape() != p->value.shape()) {
      throw DimensionError("snapshot shape mismatch for " + p->name);
    }
    p->value = it->second;
  }
}

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& samples,
                                                   std::size_t batch_size) {
  if (batch_size == 0) throw ContractError("batch size must be positive");
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t i = 0; i < samples.size(); i += batch_size) {
    batches.emplace_back(samples.begin() + static_cast<std::ptrdiff_t>(i),
                         samples.begin() + static_cast<std::ptrdiff_t>(std::min(samples.size(), i + batch_size)));
  }
  return batches;
}

namespace {

// Per-sample losses on one tape, sharing interval encodings between windows.
std::vector<ad::Var> sample_losses(const model::Forecaster& model, model::ParamBinder& bind,
                                   const Dataset& data, const std::vector<std::size_t>& starts,
                                   double beta) {
  const std::size_t w = data.forecast().window, h = data.forecast().horizon;
  std::map<std::size_t, ad::Var> encoded;
  std::vector<ad::Var> losses;
  for (const std::size_t a : starts) {
    std::vector<ad::Var> window;
    for (std::size_t t = a; t < a + w; ++t) {
      auto it = encoded.find(t);
      if (it == encoded.end()) it = encoded.emplace(t, model.encode_interval(bind, data.features(t))).first;
      window.push_back(it->second);
    }
    const auto pred = model.forecast(bind, window);
    std::vector<const std::vector<double>*> targets;
    std::vector<const std::vector<bool>*> masks;
    for (std::size_t t = a + w; t < a + w + h; ++t) {
      targets.push_back(&data.target(t));
      if (data.has_events()) masks.push_back(&data.affected(t));
    }
    losses.push_back(forecast_loss(pred, targets, masks, beta));
  }
  return losses;
}

std::string norms_report(const model::ParamStore& store) {
  std::ostringstream out;
  for (const auto* p : store.list()) {
    double s = 0.0;
    for (double v : p->value.values()) s += v * v;
    out << ' ' << p->name << '=' << format_double(std::sqrt(s));
  }
  return out.str();
}

}  // namespace

double batch_loss(model::Forecaster& model, const Dataset& data,
                  const std::vector<std::size_t>& batch, double beta, bool backward) {
  if (batch.empty()) throw ContractError("empty batch");
  ad::Tape tape(backward);
  model::ParamBinder bind(tape);
  const auto losses = sample_losses(model, bind, data, batch, beta);
  ad::Var total = losses[0];
  for (std::size_t i = 1; i < losses.size(); ++i) total = total + losses[i];
  total = ad::scale(total, 1.0 / static_cast<double>(losses.size()));
  if (backward) tape.backward(total);
  return total.item();
}

double evaluate_loss(const model::Forecaster& model, const Dataset& data, Split split,
                     double beta) {
  const auto samples = data.samples(split);
  if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (const auto& chunk : make_batches(samples, 32)) {
    ad::Tape tape(false);
    model::ParamBinder bind(tape);
    for (const auto& l : sample_losses(model, bind, data, chunk, beta)) s += l.item();
  }
  return s / static_cast<double>(samples.size());
}

TrainResult offline_train(model::Forecaster& model, const Dataset& data,
                          const TrainConfig& config, TrainState& state) {
  const auto batches = make_batches(data.samples(Split::kTrain), config.batch_size);
  if (batches.empty()) throw ContractError("no training samples");
  const double beta = data.has_events() ? config.event_beta : 1.0;
  const bool has_validation = !data.samples(Split::kValidation).empty();
  auto& store = model.params();

  TrainResult result;
  result.best_validation = std::numeric_limits<double>::infinity();
  ParamSnapshot best = snapshot(store);
  std::size_t since_best = 0;
  const std::size_t per_epoch = batches.size();
  const std::size_t step_limit =
      config.max_steps ? state.step + config.max_steps : per_epoch * config.max_epochs;

  std::vector<std::size_t> order;
  std::size_t order_epoch = std::numeric_limits<std::size_t>::max();
  double epoch_loss = 0.0;
  std::size_t epoch_batches = 0;
  while (state.step < step_limit) {
    const std::size_t epoch = state.step / per_epoch;
    const std::size_t index = state.step % per_epoch;
    if (epoch != order_epoch) {
      order.resize(per_epoch);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::mt19937_64 rng(config.seed * 1000003ULL + epoch);
      std::shuffle(order.begin(), order.end(), rng);
      order_epoch = epoch;
    }
    store.zero_grad();
    double loss = 0.0;
    try {
      loss = batch_loss(model, data, batches[order[index]], beta, true);
    } catch (const NumericError& e) {
      throw TrainingError("non-finite value at step " + std::to_string(state.step) + ": " +
                          e.what() + "; parameter norms:" + norms_report(store));
    }
    if (!std::isfinite(loss) || !std::isfinite(gradient_norm(store))) {
      throw TrainingError("non-finite loss at step " + std::to_string(state.step) +
                          "; parameter norms:" + norms_report(store));
    }
    adam_step(store, state.adam, config.adam);
    ++state.step;
    epoch_loss += loss;
    ++epoch_batches;

    CurvePoint point{state.step, epoch, loss, std::numeric_limits<double>::quiet_NaN()};
    const bool epoch_end = state.step % per_epoch == 0 || state.step == step_limit;
    if (epoch_end) {
      const double val = has_validation ? evaluate_loss(model, data, Split::kValidation, beta)
                                        : epoch_loss / static_cast<double>(epoch_batches);
      point.validation_loss = val;
      epoch_loss = 0.0;
      epoch_batches = 0;
      if (val < result.best_validation) {
        result.best_validation = val;
        result.best_step = state.step;
        best = snapshot(store);
        since_best = 0;
      } else if (++since_best >= config.patience) {
        result.curve.push_back(point);
        result.early_stopped = true;
        break;
      }
    }
    result.curve.push_back(point);
  }
  result.steps = state.step;
  if (config.keep_best) restore(store, best);
  return result;
}

std::string curve_to_csv(const TrainResult& result) {
  std::string out = "step,epoch,train_loss,validation_loss\n";
  for (const auto& p : result.curve) {
    out += std::to_string(p.step) + ',' + std::to_string(p.epoch) + ',' +
           format_double(p.train_loss) + ',' +
           (std::isnan(p.validation_loss) ? std::string() : format_double(p.validation_loss)) + '\n';
  }
  return out;
}

std::vector<std::vector<std::vector<double>>> predict(const model::Forecaster& model,
                                                      const Dataset& data,
                                                      const std::vector<std::size_t>& starts) {
  const std::size_t w = data.forecast().window;
  std::vector<std::vector<std::vector<double>>> out;
  out.reserve(starts.size());
  for (const auto& chunk : make_batches(starts, 32)) {
    ad::Tape tape(false);
    model::ParamBinder bind(tape);
    std::map<std::size_t, ad::Var> encoded;
    for (const std::size_t a : chunk) {
      if (a + w > data.num_intervals()) throw ContractError("window past the end of the data");
      std::vector<ad::Var> window;
      for (std::size_t t = a; t < a + w; ++t) {
        auto it = encoded.find(t);
        if (it == encoded.end()) it = encoded.emplace(t, model.encode_interval(bind, data.features(t))).first;
        window.push_back(it->second);
      }
      std::vector<std::vector<double>> steps;
      for (const auto& y : model.forecast(bind, window)) {
        steps.push_back(data.normalizer().unscale_output(y.value().values()));
      }
      out.push_back(std::move(steps));
    }
  }
  return out;
}

ad::Var route_loss(const model::TraffNetModel& model, model::ParamBinder& bind,
                   const model::IntervalFeatures& features,
                   const std::vector<double>& path_volumes, double demand_scale) {
  const auto& graph = model.graph();
  if (path_volumes.size() != graph.path_nodes.size()) {
    throw DimensionError("path volume vector does not match the trip graph");
  }
  const auto out = model.causal().forward(bind, features);
  ad::Tape& tape = bind.tape();
  ad::Var total;
  for (std::size_t k = 0; k < graph.od_nodes.size(); ++k) {
    const auto paths = graph.paths_of(k);
    if (paths.empty()) continue;
    std::vector<double> label;
    for (const auto j : paths) label.push_back(path_volumes[j] / demand_scale);
    const ad::Var predicted = ad::scale(out.route_shares[k], features.demand.at(k));
    const ad::Var diff = predicted - tape.constant(ad::Tensor::vector(label));
    const ad::Var sq = ad::sum(diff * diff);
    total = total.valid() ? total + sq : sq;
  }
  return ad::scale(total, 1.0 / static_cast<double>(graph.path_nodes.size()));
}

PretrainResult pretrain_route(model::TraffNetModel& model, const Dataset& data,
                              const std::vector<std::vector<double>>& path_volumes,
                              const PretrainConfig& config) {
  if (path_volumes.size() < data.num_intervals()) {
    throw DimensionError("path volumes do not cover the dataset");
  }
  PretrainResult result;
  const auto& graph = model.graph();
  result.degenerate = true;
  for (std::size_t k = 0; k < graph.od_nodes.size(); ++k) {
    if (graph.paths_of(k).size() > 1) result.degenerate = false;
  }
  std::vector<std::size_t> intervals(data.bounds().train_end);
  std::iota(intervals.begin(), intervals.end(), std::size_t{0});
  if (intervals.empty()) throw ContractError("no training intervals");
  const double scale = data.normalizer().demand_scale;
  auto& store = model.params();

  auto mean_loss = [&]() {
    double s = 0.0;
    for (const std::size_t t : intervals) {
      ad::Tape tape(false);
      model::ParamBinder bind(tape);
      s += route_loss(model, bind, data.features(t), path_volumes[t], scale).item();
    }
    return s / static_cast<double>(intervals.size());
  };
  result.initial_loss = mean_loss();

  AdamState adam;
  const auto batches = make_batches(intervals, config.batch_size);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(batches.size());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (const std::size_t b : order) {
      store.zero_grad();
      ad::Tape tape;
      model::ParamBinder bind(tape);
      ad::Var total;
      for (const std::size_t t : batches[b]) {
        const ad::Var l = route_loss(model, bind, data.features(t), path_volumes[t], scale);
        total = total.valid() ? total + l : l;
      }
      total = ad::scale(total, 1.0 / static_cast<double>(batches[b].size()));
      tape.backward(total);
      adam_step(store, adam, config.adam, "causal.");
      epoch_loss += total.item() * static_cast<double>(batches[b].size());
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(intervals.size()));
  }
  result.final_loss = mean_loss();
  return result;
}

std::vector<std::vector<std::vector<double>>> predict_route_shares(
    const model::TraffNetModel& model, const Dataset& data, const std::vector<std::size_t>& intervals) {
  std::vector<std::vector<std::vector<double>>> out;
  for (const std::size_t t : intervals) {
    ad::Tape tape(false);
    model::ParamBinder bind(tape);
    const auto res = model.causal().forward(bind, data.features(t));
    std::vector<std::vector<double>> per_od;
    for (const auto& co : res.route_shares) {
      if (!co.valid()) {
        per_od.emplace_back();
        continue;
      }
      const auto v = co.value().values();
      per_od.emplace_back(v.begin(), v.end());
    }
    out.push_back(std::move(per_od));
  }
  return out;
}

}  // namespace traffnet::train
