#pragma once

#include <cstddef>
#include <map>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "traffnet/autodiff/ops.hpp"
#include "traffnet/autodiff/tensor.hpp"

namespace traffnet::model {

/// Named parameters in name order. Addresses stay stable for the store's
/// lifetime.
class ParamStore {
 public:
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  ad::Parameter& add(const std::string& name, ad::Shape shape, std::size_t fan_in,
                     std::mt19937_64& rng);
  ad::Parameter& add_zeros(const std::string& name, ad::Shape shape);

  ad::Parameter& get(const std::string& name);
  const ad::Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.contains(name); }

  std::vector<ad::Parameter*> list(const std::string& prefix = "");
  std::vector<const ad::Parameter*> list(const std::string& prefix = "") const;
  std::size_t scalar_count() const;
  void zero_grad();

  bool operator==(const ParamStore& other) const;

 private:
  std::map<std::string, ad::Parameter> params_;
};

/// Binds each parameter to a tape at most once.
class ParamBinder {
 public:
  explicit ParamBinder(ad::Tape& tape) : tape_(tape) {}

  ad::Var operator()(ad::Parameter& p);
  ad::Tape& tape() const { return tape_; }
  ad::Var zeros(std::size_t n);

 private:
  ad::Tape& tape_;
  std::unordered_map<const ad::Parameter*, ad::Var> bound_;
  std::unordered_map<std::size_t, ad::Var> zeros_;
};

/// y = W x + b.
struct Linear {
  ad::Parameter* weight = nullptr;
  ad::Parameter* bias = nullptr;

  static Linear create(ParamStore& store, const std::string& name, std::size_t in,
                       std::size_t out, std::mt19937_64& rng);
  ad::Var operator()(ParamBinder& bind, ad::Var x) const;
};

/// Stack of Linear layers with ReLU between them (none after the last).
struct Mlp {
  std::vector<Linear> layers;

  static Mlp create(ParamStore& store, const std::string& name, std::size_t in,
                    std::size_t hidden, std::size_t out, std::size_t depth, std::mt19937_64& rng);
  ad::Var operator()(ParamBinder& bind, ad::Var x) const;
};

/// Standard GRU cell:
///   z = sigmoid(W_z x + U_z h + b_z)
///   r = sigmoid(W_r x + U_r h + b_r)
///   c = tanh(W_h x + U_h (r * h) + b_h)
///   h' = (1 - z) * h + z * c
/// The three input projections share one [3h x in] matrix so the projection
/// of a repeated input can be computed once.
struct GruCell {
  ad::Parameter* input_weight = nullptr;   // [3h, in]  rows: z, r, candidate
  ad::Parameter* gate_weight = nullptr;    // [2h, h]   rows: z, r
  ad::Parameter* cand_weight = nullptr;    // [h, h]
  ad::Parameter* bias = nullptr;           // [3h]
  std::size_t hidden = 0;

  static GruCell create(ParamStore& store, const std::string& name, std::size_t in,
                        std::size_t hidden, std::mt19937_64& rng);
  ad::Var project(ParamBinder& bind, ad::Var x) const;
  ad::Var step(ParamBinder& bind, ad::Var projected, ad::Var h) const;
  ad::Var operator()(ParamBinder& bind, ad::Var x, ad::Var h) const {
    return step(bind, project(bind, x), h);
  }
};

}  // namespace traffnet::model
