#include "traffnet/bench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "traffnet/common/error.hpp"

namespace traffnet::bench {

std::vector<std::vector<double>> ha_forecast(std::span<const std::vector<double>> history,
                                             std::size_t horizon) {
  if (history.empty()) throw ContractError("HA forecast needs a nonempty history");
  std::vector<double> mean(history[0].size(), 0.0);
  for (const auto& row : history) {
    if (row.size() != mean.size()) throw DimensionError("HA history rows differ in width");
    for (std::size_t i = 0; i < row.size(); ++i) mean[i] += row[i];
  }
  for (double& m : mean) m /= static_cast<double>(history.size());
  return std::vector<std::vector<double>>(horizon, mean);
}

HorizonMetrics cell_metrics(std::span<const double> truth, std::span<const double> predicted,
                            const std::vector<bool>* mask) {
  if (truth.size() != predicted.size() || (mask && mask->size() != truth.size())) {
    throw ContractError("metrics: shapes disagree");
  }
  HorizonMetrics m;
  double sq = 0.0, ab = 0.0, err = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (mask && !(*mask)[i]) continue;
    const double d = predicted[i] - truth[i];
    sq += d * d;
    ab += std::abs(d);
    err += d;
    ++m.cells;
  }
  if (m.cells == 0) throw ContractError("metrics: mask selects no cells");
  const auto n = static_cast<double>(m.cells);
  m.rmse = std::sqrt(sq / n);
  m.mae = ab / n;
  m.mean_error = err / n;
  return m;
}

std::vector<HorizonMetrics> compute_metrics(const Forecasts& truth, const Forecasts& predicted,
                                            const Mask* mask) {
  if (truth.size() != predicted.size() || truth.empty() || (mask && mask->size() != truth.size())) {
    throw ContractError("metrics: sample counts disagree");
  }
  const std::size_t horizon = truth[0].size();
  std::vector<HorizonMetrics> out;
  for (std::size_t h = 0; h < horizon; ++h) {
    std::vector<double> y, yhat;
    std::vector<bool> keep;
    for (std::size_t s = 0; s < truth.size(); ++s) {
      if (truth[s].size() != horizon || predicted[s].size() != horizon) {
        throw ContractError("metrics: horizon lengths disagree");
      }
      if (truth[s][h].size() != predicted[s][h].size()) throw ContractError("metrics: widths disagree");
      y.insert(y.end(), truth[s][h].begin(), truth[s][h].end());
      yhat.insert(yhat.end(), predicted[s][h].begin(), predicted[s][h].end());
      if (mask) {
        const auto& row = (*mask)[s].at(h);
        if (row.size() != truth[s][h].size()) throw ContractError("metrics: mask width disagrees");
        keep.insert(keep.end(), row.begin(), row.end());
      }
    }
    out.push_back(cell_metrics(y, yhat, mask ? &keep : nullptr));
  }
  return out;
}

ShareAccuracy route_share_accuracy(const Forecasts& predicted, const Forecasts& truth) {
  if (predicted.size() != truth.size()) throw ContractError("share accuracy: interval counts disagree");
  ShareAccuracy acc;
  double hits = 0.0, l1 = 0.0;
  for (std::size_t t = 0; t < truth.size(); ++t) {
    if (predicted[t].size() != truth[t].size()) throw ContractError("share accuracy: OD counts disagree");
    for (std::size_t k = 0; k < truth[t].size(); ++k) {
      const auto& p = predicted[t][k];
      const auto& q = truth[t][k];
      if (q.empty()) throw ContractError("share accuracy: OD " + std::to_string(k) + " has no paths");
      if (p.size() != q.size()) throw ContractError("share accuracy: path counts disagree");
      const auto pa = std::max_element(p.begin(), p.end()) - p.begin();
      const auto qa = std::max_element(q.begin(), q.end()) - q.begin();
      hits += pa == qa ? 1.0 : 0.0;
      double d = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) d += std::abs(p[j] - q[j]);
      l1 += 0.5 * d;
      ++acc.cases;
    }
  }
  if (acc.cases == 0) throw ContractError("share accuracy: nothing to compare");
  acc.argmax = hits / static_cast<double>(acc.cases);
  acc.l1 = 1.0 - l1 / static_cast<double>(acc.cases);
  return acc;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw ContractError("pearson: series lengths disagree");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<EdgeCorrelation> adjacency_correlation(const trip::DemandVolumePanel& panel,
                                                   const trip::RoadNetwork& net) {
  if (panel.num_intervals() < 3) throw ContractError("adjacency correlation needs >= 3 intervals");
  if (panel.num_nodes != net.size()) throw DimensionError("panel and network sizes disagree");
  std::vector<std::vector<double>> series(net.size(), std::vector<double>(panel.num_intervals()));
  for (std::size_t t = 0; t < panel.num_intervals(); ++t) {
    for (std::size_t i = 0; i < net.size(); ++i) series[i][t] = panel.volume_series[t][i];
  }
  std::vector<EdgeCorrelation> out;
  for (const auto& [a, b] : net.edges()) out.push_back({a, b, pearson(series[a], series[b])});
  return out;
}

}  // namespace traffnet::bench
