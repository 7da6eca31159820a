#include "traffnet/trainer/loss.hpp"

#include "traffnet/common/error.hpp"

namespace traffnet::train {

double mse_loss(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw DimensionError("mse_loss: shape mismatch");
  if (y.empty()) throw DimensionError("mse_loss: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - y_hat[i]) * (y[i] - y_hat[i]);
  return s / static_cast<double>(y.size());
}

double weighted_event_loss(const std::vector<std::vector<double>>& y,
                           const std::vector<std::vector<double>>& y_hat,
                           const std::vector<std::vector<std::size_t>>& affected, double beta) {
  if (!(beta > 0.0)) throw ContractError("beta must be positive");
  if (y.size() != y_hat.size() || y.empty()) throw DimensionError("event loss: shape mismatch");
  if (!affected.empty() && affected.size() != y.size()) {
    throw DimensionError("event loss: one affected list per horizon step expected");
  }
  const std::size_t nodes = y[0].size();
  double s = 0.0;
  for (std::size_t l = 0; l < y.size(); ++l) {
    if (y[l].size() != nodes || y_hat[l].size() != nodes) {
      throw DimensionError("event loss: shape mismatch");
    }
    std::vector<double> w(nodes, 1.0);
    if (!affected.empty()) {
      for (std::size_t id : affected[l]) {
        if (id >= nodes) throw ValidationError("event loss: unknown segment " + std::to_string(id));
        w[id] = beta;
      }
    }
    for (std::size_t i = 0; i < nodes; ++i) {
      s += w[i] * (y[l][i] - y_hat[l][i]) * (y[l][i] - y_hat[l][i]);
    }
  }
  return s / static_cast<double>(nodes * y.size());
}

ad::Var forecast_loss(std::span<const ad::Var> prediction,
                      std::span<const std::vector<double>* const> target,
                      std::span<const std::vector<bool>* const> affected, double beta) {
  if (prediction.size() != target.size() || prediction.empty()) {
    throw DimensionError("forecast_loss: horizon mismatch");
  }
  ad::Tape& tape = prediction[0].tape();
  const std::size_t nodes = prediction[0].size();
  ad::Var total;
  for (std::size_t l = 0; l < prediction.size(); ++l) {
    if (target[l]->size() != nodes) throw DimensionError("forecast_loss: shape mismatch");
    const ad::Var diff = prediction[l] - tape.constant(ad::Tensor::vector(*target[l]));
    ad::Var sq = diff * diff;
    const std::vector<bool>* mask = affected.empty() ? nullptr : affected[l];
    if (mask && !mask->empty() && beta != 1.0) {
      std::vector<double> w(nodes, 1.0);
      for (std::size_t i = 0; i < nodes; ++i) {
        if ((*mask)[i]) w[i] = beta;
      }
      sq = tape.constant(ad::Tensor::vector(w)) * sq;
    }
    const ad::Var part = ad::sum(sq);
    total = l == 0 ? part : total + part;
  }
  return ad::scale(total, 1.0 / static_cast<double>(nodes * prediction.size()));
}

}  // namespace traffnet::train
