#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "traffnet/model/causal_encoder.hpp"
#include "traffnet/model/config.hpp"
#include "traffnet/model/features.hpp"
#include "traffnet/model/params.hpp"
#include "traffnet/model/temporal.hpp"
#include "traffnet/tripgraph/road_network.hpp"
#include "traffnet/tripgraph/trip_graph.hpp"

namespace traffnet::model {

/// A trainable multi-horizon volume forecaster. Forecasts are in scaled
/// volume units (volume / output scale), one |V| vector per horizon step.
class Forecaster {
 public:
  virtual ~Forecaster() = default;

  virtual std::string kind() const = 0;
  virtual const ModelConfig& config() const = 0;
  virtual ParamStore& params() = 0;
  const ParamStore& params() const { return const_cast<Forecaster*>(this)->params(); }

  /// Per-interval input to the temporal module, after its first-layer input
  /// projection. Results may be shared by every window that contains the
  /// interval.
  virtual ad::Var encode_interval(ParamBinder& bind, const IntervalFeatures& f) const = 0;
  virtual std::vector<ad::Var> forecast(ParamBinder& bind,
                                        std::span<const ad::Var> encoded) const = 0;

  std::vector<ad::Var> forward(ParamBinder& bind,
                               std::span<const IntervalFeatures* const> window) const;
};

class TraffNetModel : public Forecaster {
 public:
  TraffNetModel(const trip::RoadNetwork& net, const trip::TripGraph& graph, ModelConfig config);

  std::string kind() const override { return "traffnet"; }
  const ModelConfig& config() const override { return config_; }
  ParamStore& params() override { return store_; }
  ad::Var encode_interval(ParamBinder& bind, const IntervalFeatures& f) const override;
  std::vector<ad::Var> forecast(ParamBinder& bind, std::span<const ad::Var> encoded) const override;

  const CausalEncoder& causal() const { return *causal_; }
  const TemporalModule& temporal() const { return *temporal_; }
  const trip::RoadNetwork& network() const { return net_; }
  const trip::TripGraph& graph() const { return graph_; }

 private:
  trip::RoadNetwork net_;
  trip::TripGraph graph_;
  ModelConfig config_;
  ParamStore store_;
  std::unique_ptr<CausalEncoder> causal_;
  std::unique_ptr<TemporalModule> temporal_;
};

/// Plain GRU over z-scored volume vectors; no trip graph, no OD demand.
class GruBaseline : public Forecaster {
 public:
  GruBaseline(std::size_t num_nodes, ModelConfig config);

  std::string kind() const override { return "gru"; }
  std::size_t num_nodes() const { return num_nodes_; }
  const ModelConfig& config() const override { return config_; }
  ParamStore& params() override { return store_; }
  ad::Var encode_interval(ParamBinder& bind, const IntervalFeatures& f) const override;
  std::vector<ad::Var> forecast(ParamBinder& bind, std::span<const ad::Var> encoded) const override;

 private:
  std::size_t num_nodes_;
  ModelConfig config_;
  ParamStore store_;
  std::unique_ptr<TemporalModule> temporal_;
};

}  // namespace traffnet::model
