#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "traffnet/model/config.hpp"
#include "traffnet/model/params.hpp"

namespace traffnet::model {

/// Stacked GRU over the history window, rolled forward for the horizon, with
/// a residual output head relu(W_res z + MLP(z)).
class TemporalModule {
 public:
  TemporalModule(const std::string& prefix, std::size_t input_width, std::size_t outputs,
                 const ModelConfig& config, ParamStore& store, std::mt19937_64& rng);

  /// Runs the stack over exactly `window` inputs from zero state and returns
  /// the final hidden state of every layer (last entry is the top layer).
  std::vector<ad::Var> encode(ParamBinder& bind, std::span<const ad::Var> inputs) const;

  /// Rolls the stack `horizon` more steps, feeding `decoder_input` each
  /// step, and maps each top-layer state through the output head.
  std::vector<ad::Var> decode_and_output(ParamBinder& bind, std::vector<ad::Var> state,
                                         ad::Var decoder_input) const;

  ad::Var head(ParamBinder& bind, ad::Var z) const;

  /// First-layer input projection. The *_projected variants take inputs
  /// already passed through it, so an interval shared by several windows
  /// (or re-fed to the decoder) is projected once.
  ad::Var project(ParamBinder& bind, ad::Var x) const;
  std::vector<ad::Var> encode_projected(ParamBinder& bind, std::span<const ad::Var> projected) const;
  std::vector<ad::Var> decode_projected(ParamBinder& bind, std::vector<ad::Var> state,
                                        ad::Var projected) const;

  std::size_t input_width() const { return input_width_; }

 private:
  std::vector<ad::Var> advance(ParamBinder& bind, const std::vector<ad::Var>& state,
                               ad::Var input) const;

  std::size_t input_width_;
  std::size_t outputs_;
  ModelConfig config_;
  std::vector<GruCell> cells_;
  ad::Parameter* residual_ = nullptr;  // [outputs, hidden]
  Mlp head_mlp_;
};

}  // namespace traffnet::model
