#include "traffnet/model/temporal.hpp"

#include "traffnet/common/error.hpp"

namespace traffnet::model {

TemporalModule::TemporalModule(const std::string& prefix, std::size_t input_width,
                               std::size_t outputs, const ModelConfig& config, ParamStore& store,
                               std::mt19937_64& rng)
    : input_width_(input_width), outputs_(outputs), config_(config) {
  if (config.temporal_layers == 0 || config.temporal_hidden == 0) {
    throw ContractError("temporal module needs at least one layer");
  }
  std::size_t in = input_width;
  for (std::size_t l = 0; l < config.temporal_layers; ++l) {
    cells_.push_back(GruCell::create(store, prefix + ".gru.l" + std::to_string(l), in,
                                     config.temporal_hidden, rng));
    in = config.temporal_hidden;
  }
  const std::size_t hid = config.temporal_hidden;
  residual_ = &store.add(prefix + ".head.residual", {outputs, hid}, hid, rng);
  head_mlp_ = Mlp::create(store, prefix + ".head.mlp", hid, hid, outputs, config.head_mlp_layers,
                          rng);
  // Targets are scaled to a mean near 1; starting there keeps the final ReLU
  // away from its dead side.
  for (double& b : head_mlp_.layers.back().bias->value.values()) b = 1.0;
}

std::vector<ad::Var> TemporalModule::advance(ParamBinder& bind, const std::vector<ad::Var>& state,
                                             ad::Var projected) const {
  std::vector<ad::Var> next(cells_.size());
  next[0] = cells_[0].step(bind, projected, state[0]);
  for (std::size_t l = 1; l < cells_.size(); ++l) next[l] = cells_[l](bind, next[l - 1], state[l]);
  return next;
}

ad::Var TemporalModule::project(ParamBinder& bind, ad::Var x) const {
  if (x.size() != input_width_) throw DimensionError("temporal input has the wrong width");
  return cells_[0].project(bind, x);
}

std::vector<ad::Var> TemporalModule::encode(ParamBinder& bind,
                                            std::span<const ad::Var> inputs) const {
  std::vector<ad::Var> projected;
  for (const auto& x : inputs) projected.push_back(project(bind, x));
  return encode_projected(bind, projected);
}

std::vector<ad::Var> TemporalModule::encode_projected(ParamBinder& bind,
                                                      std::span<const ad::Var> projected) const {
  if (projected.size() != config_.forecast.window) {
    throw ContractError("expected " + std::to_string(config_.forecast.window) +
                        " window inputs, got " + std::to_string(projected.size()));
  }
  std::vector<ad::Var> state(cells_.size(), bind.zeros(config_.temporal_hidden));
  for (const auto& p : projected) state = advance(bind, state, p);
  return state;
}

std::vector<ad::Var> TemporalModule::decode_and_output(ParamBinder& bind,
                                                       std::vector<ad::Var> state,
                                                       ad::Var decoder_input) const {
  return decode_projected(bind, std::move(state), project(bind, decoder_input));
}

std::vector<ad::Var> TemporalModule::decode_projected(ParamBinder& bind,
                                                      std::vector<ad::Var> state,
                                                      ad::Var projected) const {
  const ad::Var in =
      config_.zero_input_decoder ? project(bind, bind.zeros(input_width_)) : projected;
  std::vector<ad::Var> out;
  out.reserve(config_.forecast.horizon);
  for (std::size_t step = 0; step < config_.forecast.horizon; ++step) {
    state = advance(bind, state, in);
    out.push_back(head(bind, state.back()));
  }
  return out;
}

ad::Var TemporalModule::head(ParamBinder& bind, ad::Var z) const {
  return ad::relu(ad::matmul(bind(*residual_), z) + head_mlp_(bind, z));
}

}  // namespace traffnet::model
