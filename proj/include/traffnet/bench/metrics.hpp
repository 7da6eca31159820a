#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "traffnet/tripgraph/panel.hpp"
#include "traffnet/tripgraph/road_network.hpp"

namespace traffnet::bench {

/// [sample][horizon][node]
using Forecasts = std::vector<std::vector<std::vector<double>>>;
using Mask = std::vector<std::vector<std::vector<bool>>>;

/// Per-node mean of the history window, repeated for every horizon step.
std::vector<std::vector<double>> ha_forecast(std::span<const std::vector<double>> history,
                                             std::size_t horizon);

struct HorizonMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  double mean_error = 0.0;  // mean of prediction - truth
  std::size_t cells = 0;
};

/// Metrics over flat cell lists; mask selects cells. Throws ContractError on
/// a shape mismatch or an empty selection.
HorizonMetrics cell_metrics(std::span<const double> truth, std::span<const double> predicted,
                            const std::vector<bool>* mask = nullptr);

/// One entry per horizon step, pooled over samples and (masked) nodes.
std::vector<HorizonMetrics> compute_metrics(const Forecasts& truth, const Forecasts& predicted,
                                            const Mask* mask = nullptr);

struct ShareAccuracy {
  double argmax = 0.0;  // fraction of OD-intervals whose top path matches
  double l1 = 0.0;      // 1 - mean half-L1 distance between share vectors
  std::size_t cases = 0;
};

/// Shares are [interval][od][path]. Throws ContractError on an OD with no
/// paths or misaligned shapes. Argmax ties resolve to the lowest path index.
ShareAccuracy route_share_accuracy(const Forecasts& predicted, const Forecasts& truth);

/// Two-pass Pearson coefficient; nullopt when either series has zero
/// variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

struct EdgeCorrelation {
  trip::NodeId from = 0;
  trip::NodeId to = 0;
  std::optional<double> r;
};

/// Pearson r between the volume series of each directed edge's endpoints.
/// Needs at least three intervals.
std::vector<EdgeCorrelation> adjacency_correlation(const trip::DemandVolumePanel& panel,
                                                   const trip::RoadNetwork& net);

}  // namespace traffnet::bench
