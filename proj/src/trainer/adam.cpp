#include "traffnet/trainer/adam.hpp"

#include <cmath>

namespace traffnet::train {

double gradient_norm(const model::ParamStore& store) {
  double s = 0.0;
  for (const auto* p : store.list()) {
    for (double g : p->grad) s += g * g;
  }
  return std::sqrt(s);
}

double adam_step(model::ParamStore& store, AdamState& state, const AdamConfig& config,
                 const std::string& prefix) {
  const auto params = store.list(prefix);
  double sq = 0.0;
  for (const auto* p : params) {
    for (double g : p->grad) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  const double clip = config.clip_norm > 0.0 && norm > config.clip_norm ? config.clip_norm / norm : 1.0;

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (auto* p : params) {
    auto& m = state.m[p->name];
    auto& v = state.v[p->name];
    if (m.size() != p->value.size()) m = ad::Tensor(p->value.shape());
    if (v.size() != p->value.size()) v = ad::Tensor(p->value.shape());
    auto value = p->value.values();
    const auto& grad = p->grad;
    auto mv = m.values();
    auto vv = v.values();
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (config.weight_decay > 0.0) value[i] -= config.lr * config.weight_decay * value[i];
      const double g = grad[i] * clip;
      mv[i] = config.beta1 * mv[i] + (1.0 - config.beta1) * g;
      vv[i] = config.beta2 * vv[i] + (1.0 - config.beta2) * g * g;
      if (g == 0.0 && mv[i] == 0.0) continue;
      value[i] -= config.lr * (mv[i] / c1) / (std::sqrt(vv[i] / c2) + config.eps);
    }
  }
  return norm;
}

}  // namespace traffnet::train
