#include "traffnet/bench/experiment.hpp"

namespace traffnet::bench {

namespace {

train::Dataset make_dataset(const gen::GroundTruth& truth, const trip::TripGraph& graph,
                            const train::Normalizer& norm, const model::ForecastConfig& forecast) {
  return train::Dataset(truth.panel, graph, norm, forecast, truth.affected_mask);
}

}  // namespace

SuiteInputs Experiment::inputs() const {
  SuiteInputs in;
  in.net = &scenario.net;
  in.graph = &graph;
  in.panel = &truth.panel;
  in.affected = truth.affected_mask;
  in.path_volumes = path_volumes;
  in.true_shares = true_shares;
  in.dataset_id = scenario.name + "-seed" + std::to_string(scenario.seed);
  return in;
}

Experiment prepare_experiment(const gen::Scenario& scenario, const model::ForecastConfig& forecast,
                              std::size_t min_support) {
  gen::GroundTruth truth = gen::generate(scenario);
  const auto trips = trip::extract_trips(truth.trajectories, scenario.net, {},
                                         {kGeneratedTripGap, scenario.interval_seconds, 0.0, {}});
  trip::TripGraph graph = trip::build_trip_graph(trips, scenario.net, {.min_support = min_support});
  const auto bounds = train::SplitBounds::chronological(truth.panel.num_intervals());
  train::Normalizer norm = train::Normalizer::fit(truth.panel, graph, bounds.train_end);
  train::Dataset data = make_dataset(truth, graph, norm, forecast);
  auto volumes = gen::align_path_volumes(scenario, truth, graph);
  auto shares = align_route_shares(scenario, truth, graph);
  return Experiment{scenario, std::move(truth), std::move(graph), std::move(norm), std::move(data),
                    std::move(volumes), std::move(shares)};
}

}  // namespace traffnet::bench
