#pragma once

#include <string>

#include "traffnet/bench/suite.hpp"
#include "traffnet/trafficgen/generator.hpp"
#include "traffnet/trainer/dataset.hpp"

namespace traffnet::bench {

/// Generator trips are cut at gaps this long. Congested segments can hold a
/// vehicle for several minutes, so the usual five-minute gap splits them.
inline constexpr double kGeneratedTripGap = 3600.0;

/// Everything derived from one generated scenario: ground truth, the trip
/// graph rebuilt from its trajectories, train-split normalization and the
/// windowed dataset.
struct Experiment {
  gen::Scenario scenario;
  gen::GroundTruth truth;
  trip::TripGraph graph;
  train::Normalizer normalizer;
  train::Dataset data;
  std::vector<std::vector<double>> path_volumes;  // aligned to graph paths
  Forecasts true_shares;                          // aligned to graph ODs

  SuiteInputs inputs() const;
};

Experiment prepare_experiment(const gen::Scenario& scenario, const model::ForecastConfig& forecast,
                              std::size_t min_support = 2);

}  // namespace traffnet::bench
