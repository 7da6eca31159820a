#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "traffnet/model/config.hpp"
#include "traffnet/model/features.hpp"
#include "traffnet/tripgraph/panel.hpp"
#include "traffnet/tripgraph/trip_graph.hpp"

namespace traffnet::train {

/// Unnormalized observations of one interval, demand in trip-graph OD order.
struct RawInterval {
  std::vector<double> demand;
  std::vector<double> volume;
  std::vector<double> speed;
};

RawInterval raw_interval(const trip::DemandVolumePanel& panel, const trip::TripGraph& graph,
                         std::size_t t);

/// Train-split statistics. Volumes and speeds are z-scored per node, OD
/// demand is divided by demand_scale and targets by output_scale.
struct Normalizer {
  std::vector<double> volume_mean, volume_std;
  std::vector<double> speed_mean, speed_std;
  double demand_scale = 1.0;
  double output_scale = 1.0;

  /// Statistics over intervals [0, end).
  static Normalizer fit(const trip::DemandVolumePanel& panel, const trip::TripGraph& graph,
                        std::size_t end);

  model::IntervalFeatures features(const RawInterval& raw) const;
  std::vector<double> scale_target(const std::vector<double>& volume) const;
  std::vector<double> unscale_output(std::span<const double> output) const;

  bool operator==(const Normalizer&) const = default;
};

enum class Split { kTrain, kValidation, kTest };

/// Chronological 4:1:2 interval split.
struct SplitBounds {
  std::size_t train_end = 0;
  std::size_t validation_end = 0;
  std::size_t end = 0;

  static SplitBounds chronological(std::size_t intervals);
};

/// Windowed samples over one panel. Sample `a` reads intervals [a, a+window)
/// and predicts [a+window, a+window+horizon); it belongs to the split that
/// holds all of its target intervals.
class Dataset {
 public:
  Dataset(const trip::DemandVolumePanel& panel, const trip::TripGraph& graph,
          const Normalizer& normalizer, const model::ForecastConfig& forecast,
          std::vector<std::vector<bool>> affected = {});

  std::size_t num_intervals() const { return features_.size(); }
  std::size_t num_nodes() const { return num_nodes_; }
  const model::ForecastConfig& forecast() const { return forecast_; }
  const SplitBounds& bounds() const { return bounds_; }
  const Normalizer& normalizer() const { return normalizer_; }

  std::vector<std::size_t> samples(Split split) const;

  const model::IntervalFeatures& features(std::size_t t) const { return features_.at(t); }
  const std::vector<double>& target(std::size_t t) const { return targets_.at(t); }
  const std::vector<double>& volume(std::size_t t) const { return volumes_.at(t); }
  /// Empty when no event mask was supplied.
  const std::vector<bool>& affected(std::size_t t) const;
  bool has_events() const { return !affected_.empty(); }

 private:
  std::size_t num_nodes_;
  model::ForecastConfig forecast_;
  Normalizer normalizer_;
  SplitBounds bounds_;
  std::vector<model::IntervalFeatures> features_;
  std::vector<std::vector<double>> targets_;
  std::vector<std::vector<double>> volumes_;
  std::vector<std::vector<bool>> affected_;
};

}  // namespace traffnet::train
