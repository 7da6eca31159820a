#include "traffnet/trainer/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "traffnet/common/error.hpp"

namespace traffnet::train {

RawInterval raw_interval(const trip::DemandVolumePanel& panel, const trip::TripGraph& graph,
                         std::size_t t) {
  if (t >= panel.num_intervals()) throw ContractError("interval outside the panel");
  RawInterval raw;
  raw.demand.reserve(graph.od_nodes.size());
  for (const auto& od : graph.od_nodes) raw.demand.push_back(panel.demand(t, {od.origin, od.destination}));
  raw.volume = panel.volume_series[t];
  raw.speed = panel.speed_series[t];
  return raw;
}

namespace {

void moments(const std::vector<std::vector<double>>& series, std::size_t end, std::size_t nodes,
             std::vector<double>& mean, std::vector<double>& sd) {
  mean.assign(nodes, 0.0);
  sd.assign(nodes, 1.0);
  if (end == 0) return;
  for (std::size_t i = 0; i < nodes; ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < end; ++t) s += series[t][i];
    mean[i] = s / static_cast<double>(end);
    double q = 0.0;
    for (std::size_t t = 0; t < end; ++t) q += (series[t][i] - mean[i]) * (series[t][i] - mean[i]);
    const double v = std::sqrt(q / static_cast<double>(end));
    sd[i] = v > 1e-9 ? v : 1.0;
  }
}

}  // namespace

Normalizer Normalizer::fit(const trip::DemandVolumePanel& panel, const trip::TripGraph& graph,
                           std::size_t end) {
  end = std::min(end, panel.num_intervals());
  Normalizer n;
  moments(panel.volume_series, end, panel.num_nodes, n.volume_mean, n.volume_std);
  moments(panel.speed_series, end, panel.num_nodes, n.speed_mean, n.speed_std);
  double demand = 0.0;
  std::size_t count = 0;
  double volume = 0.0;
  std::size_t cells = 0;
  for (std::size_t t = 0; t < end; ++t) {
    for (const auto& od : graph.od_nodes) {
      demand += panel.demand(t, {od.origin, od.destination});
      ++count;
    }
    for (double v : panel.volume_series[t]) {
      if (v > 0.0) {
        volume += v;
        ++cells;
      }
    }
  }
  if (count > 0 && demand > 0.0) n.demand_scale = demand / static_cast<double>(count);
  if (cells > 0) n.output_scale = volume / static_cast<double>(cells);
  return n;
}

model::IntervalFeatures Normalizer::features(const RawInterval& raw) const {
  if (raw.volume.size() != volume_mean.size() || raw.speed.size() != speed_mean.size()) {
    throw DimensionError("observation does not match the normalizer's node count");
  }
  model::IntervalFeatures f;
  f.demand.reserve(raw.demand.size());
  for (double d : raw.demand) {
    if (!(d >= 0.0)) throw ValidationError("negative OD demand");
    f.demand.push_back(d / demand_scale);
  }
  f.volume.resize(raw.volume.size());
  f.speed.resize(raw.speed.size());
  for (std::size_t i = 0; i < raw.volume.size(); ++i) {
    f.volume[i] = (raw.volume[i] - volume_mean[i]) / volume_std[i];
    f.speed[i] = (raw.speed[i] - speed_mean[i]) / speed_std[i];
  }
  return f;
}

std::vector<double> Normalizer::scale_target(const std::vector<double>& volume) const {
  std::vector<double> out(volume.size());
  for (std::size_t i = 0; i < volume.size(); ++i) out[i] = volume[i] / output_scale;
  return out;
}

std::vector<double> Normalizer::unscale_output(std::span<const double> output) const {
  std::vector<double> out(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) out[i] = output[i] * output_scale;
  return out;
}

SplitBounds SplitBounds::chronological(std::size_t intervals) {
  SplitBounds b;
  b.end = intervals;
  b.train_end = intervals * 4 / 7;
  b.validation_end = intervals * 5 / 7;
  return b;
}

Dataset::Dataset(const trip::DemandVolumePanel& panel, const trip::TripGraph& graph,
                 const Normalizer& normalizer, const model::ForecastConfig& forecast,
                 std::vector<std::vector<bool>> affected)
    : num_nodes_(panel.num_nodes),
      forecast_(forecast),
      normalizer_(normalizer),
      bounds_(SplitBounds::chronological(panel.num_intervals())),
      affected_(std::move(affected)) {
  if (!affected_.empty() && affected_.size() != panel.num_intervals()) {
    throw DimensionError("affected mask does not cover the panel");
  }
  for (std::size_t t = 0; t < panel.num_intervals(); ++t) {
    features_.push_back(normalizer.features(raw_interval(panel, graph, t)));
    volumes_.push_back(panel.volume_series[t]);
    targets_.push_back(normalizer.scale_target(panel.volume_series[t]));
  }
}

std::vector<std::size_t> Dataset::samples(Split split) const {
  std::size_t lo = 0, hi = bounds_.train_end;
  if (split == Split::kValidation) {
    lo = bounds_.train_end;
    hi = bounds_.validation_end;
  } else if (split == Split::kTest) {
    lo = bounds_.validation_end;
    hi = bounds_.end;
  }
  const std::size_t w = forecast_.window, h = forecast_.horizon;
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a + w + h <= hi; ++a) {
    if (a + w >= lo) out.push_back(a);
  }
  return out;
}

const std::vector<bool>& Dataset::affected(std::size_t t) const {
  static const std::vector<bool> kNone;
  return affected_.empty() ? kNone : affected_.at(t);
}

}  // namespace traffnet::train
