#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "traffnet/autodiff/tensor.hpp"
#include "traffnet/model/params.hpp"

namespace traffnet::train {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Global gradient-norm clip; 0 disables.
  double clip_norm = 5.0;
  /// Decoupled (AdamW) decay applied to every updated value; 0 disables.
  double weight_decay = 0.0;
};

/// Moment estimates keyed by parameter name.
struct AdamState {
  std::uint64_t step = 0;
  std::map<std::string, ad::Tensor> m;
  std::map<std::string, ad::Tensor> v;

  bool operator==(const AdamState&) const = default;
};

/// Global L2 norm of the gradients of every parameter in the store.
double gradient_norm(const model::ParamStore& store);

/// One Adam update of every parameter whose name starts with prefix, from
/// the gradients currently held in the store. Returns the pre-clip norm.
double adam_step(model::ParamStore& store, AdamState& state, const AdamConfig& config,
                 const std::string& prefix = "");

}  // namespace traffnet::train
