#include "traffnet/model/forecaster.hpp"

#include "traffnet/common/error.hpp"

namespace traffnet::model {

std::vector<ad::Var> Forecaster::forward(ParamBinder& bind,
                                         std::span<const IntervalFeatures* const> window) const {
  std::vector<ad::Var> encoded;
  encoded.reserve(window.size());
  for (const auto* f : window) encoded.push_back(encode_interval(bind, *f));
  return forecast(bind, encoded);
}

TraffNetModel::TraffNetModel(const trip::RoadNetwork& net, const trip::TripGraph& graph,
                             ModelConfig config)
    : net_(net), graph_(graph), config_(config) {
  std::mt19937_64 rng(config_.seed);
  causal_ = std::make_unique<CausalEncoder>(net_, graph_, config_, store_, rng);
  temporal_ = std::make_unique<TemporalModule>("temporal", causal_->output_width(), net_.size(),
                                               config_, store_, rng);
}

ad::Var TraffNetModel::encode_interval(ParamBinder& bind, const IntervalFeatures& f) const {
  return temporal_->project(bind, causal_->forward(bind, f).segment_embeddings);
}

std::vector<ad::Var> TraffNetModel::forecast(ParamBinder& bind,
                                             std::span<const ad::Var> encoded) const {
  if (encoded.empty()) throw ContractError("empty history window");
  return temporal_->decode_projected(bind, temporal_->encode_projected(bind, encoded),
                                     encoded.back());
}

GruBaseline::GruBaseline(std::size_t num_nodes, ModelConfig config)
    : num_nodes_(num_nodes), config_(config) {
  std::mt19937_64 rng(config_.seed);
  temporal_ = std::make_unique<TemporalModule>("temporal", num_nodes, num_nodes, config_, store_,
                                               rng);
}

ad::Var GruBaseline::encode_interval(ParamBinder& bind, const IntervalFeatures& f) const {
  if (f.volume.size() != num_nodes_) throw DimensionError("volume vector has the wrong size");
  return temporal_->project(bind, bind.tape().constant(ad::Tensor::vector(f.volume)));
}

std::vector<ad::Var> GruBaseline::forecast(ParamBinder& bind,
                                           std::span<const ad::Var> encoded) const {
  if (encoded.empty()) throw ContractError("empty history window");
  return temporal_->decode_projected(bind, temporal_->encode_projected(bind, encoded),
                                     encoded.back());
}

}  // namespace traffnet::model
