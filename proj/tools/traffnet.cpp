// traffnet: command line front end for the traffic assignment lab.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "traffnet/bench/experiment.hpp"
#include "traffnet/bench/suite.hpp"
#include "traffnet/common/error.hpp"
#include "traffnet/common/text.hpp"
#include "traffnet/gateway/server.hpp"
#include "traffnet/gateway/session.hpp"
#include "traffnet/trafficgen/generator.hpp"
#include "traffnet/trainer/checkpoint.hpp"
#include "traffnet/trainer/online.hpp"
#include "traffnet/tripgraph/io.hpp"

using namespace traffnet;
namespace fs = std::filesystem;

namespace {

/// Everything a generated data directory holds, plus its trip graph once
/// build-graph has run.
struct DataDir {
  std::string dir;
  trip::RoadNetwork net;
  trip::DemandVolumePanel panel;
  std::vector<std::vector<bool>> affected;
  std::optional<gen::Scenario> scenario;
  std::optional<trip::TripGraph> graph;

  std::string file(const std::string& name) const { return (fs::path(dir) / name).string(); }

  const trip::TripGraph& require_graph() const {
    if (!graph) throw ContractError("no trip graph in " + dir + " (run build-graph first)");
    return *graph;
  }

  std::string dataset_id() const {
    return scenario ? scenario->name + "-seed" + std::to_string(scenario->seed) : fs::path(dir).filename().string();
  }

  /// Generator ground truth re-indexed to the trip graph; empty without a
  /// scenario file.
  gen::GroundTruth truth() const {
    gen::GroundTruth gt;
    if (fs::exists(file("path_volumes.csv"))) gt.path_volumes = gen::load_path_volumes(file("path_volumes.csv"));
    if (fs::exists(file("route_shares.json"))) gt.route_shares = gen::load_route_shares(file("route_shares.json"));
    return gt;
  }
  std::vector<std::vector<double>> path_volumes() const {
    const auto gt = truth();
    if (!scenario || gt.path_volumes.empty()) return {};
    return gen::align_path_volumes(*scenario, gt, require_graph());
  }
  bench::Forecasts true_shares() const {
    const auto gt = truth();
    if (!scenario || gt.route_shares.empty()) return {};
    return bench::align_route_shares(*scenario, gt, require_graph());
  }
};

DataDir load_data(const std::string& dir, const std::string& graph_path) {
  DataDir d;
  d.dir = dir;
  d.net = trip::load_network(d.file("network.json"));
  d.panel = trip::load_panel(d.file("panel"));
  if (fs::exists(d.file("affected.csv"))) d.affected = gen::load_affected(d.file("affected.csv"));
  if (fs::exists(d.file("scenario.json"))) d.scenario = gen::load_scenario(d.file("scenario.json"));
  const std::string g = graph_path.empty() ? d.file("trip_graph.json") : graph_path;
  if (fs::exists(g)) d.graph = trip::load_trip_graph(g);
  return d;
}

gen::Scenario scenario_arg(const std::string& name, std::optional<std::uint64_t> seed,
                           std::optional<std::size_t> horizon) {
  if (name == "sy-mini" || name == "vs-mini") {
    const std::uint64_t s = seed.value_or(7);
    const std::size_t h = horizon.value_or(420);
    return name == "sy-mini" ? gen::sy_mini(s, h) : gen::vs_mini(s, h);
  }
  gen::Scenario sc = gen::load_scenario(name);
  if (seed) sc.seed = *seed;
  if (horizon) {
    if (*horizon > sc.horizon) throw ContractError("--horizon exceeds the scenario's demand schedule");
    sc.horizon = *horizon;
    for (auto& od : sc.ods) od.rates.resize(*horizon);
    for (const auto& e : sc.events) gen::validate_event(e, sc.net, sc.horizon);
  }
  sc.validate();
  return sc;
}

model::ModelConfig model_config(const std::string& path, std::optional<std::uint64_t> seed) {
  model::ModelConfig c = path.empty() ? model::ModelConfig{} : model::model_config_from_json(read_file(path));
  if (seed) c.seed = *seed;
  return c;
}

train::Normalizer fit_normalizer(const DataDir& d) {
  const auto bounds = train::SplitBounds::chronological(d.panel.num_intervals());
  return train::Normalizer::fit(d.panel, d.require_graph(), bounds.train_end);
}

std::unique_ptr<model::Forecaster> fresh_model(bench::Variant v, const DataDir& d, model::ModelConfig mc) {
  if (v == bench::Variant::kGru) return std::make_unique<model::GruBaseline>(d.net.size(), mc);
  if (!bench::trainable(v)) throw ContractError(bench::variant_name(v) + " has nothing to train");
  mc.no_od = v == bench::Variant::kNoOd;
  mc.no_tf = v == bench::Variant::kNoTf;
  return std::make_unique<model::TraffNetModel>(d.net, d.require_graph(), mc);
}

train::Dataset dataset(const DataDir& d, const train::Normalizer& norm, const model::ForecastConfig& fc) {
  return train::Dataset(d.panel, d.require_graph(), norm, fc, d.affected);
}

std::unique_ptr<gateway::Session> make_session(const std::string& checkpoint, const DataDir& d,
                                               std::size_t phi, bool frozen, double lr) {
  gateway::SessionConfig cfg;
  cfg.phi = phi;
  cfg.online_updates = !frozen;
  cfg.adam.lr = lr;
  return std::make_unique<gateway::Session>(train::load_checkpoint(checkpoint), d.net, d.require_graph(),
                                            d.panel, d.affected, cfg);
}

void check_variant(const model::Forecaster& m, bench::Variant v, const std::string& path) {
  const bool gru = m.kind() == "gru";
  const bool match = bench::trainable(v) && gru == (v == bench::Variant::kGru) &&
                     (gru || (m.config().no_od == (v == bench::Variant::kNoOd) &&
                              m.config().no_tf == (v == bench::Variant::kNoTf)));
  if (!match) throw ContractError("checkpoint " + path + " does not hold variant " + bench::variant_name(v));
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v != nullptr && *v != '\0' ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"traffnet: symbiotic traffic assignment lab"};
  app.require_subcommand(1);

  // generate
  auto* gen_cmd = app.add_subcommand("generate", "Simulate a scenario and write its ground truth");
  std::string g_scenario, g_out;
  std::optional<std::uint64_t> g_seed;
  std::optional<std::size_t> g_horizon;
  gen_cmd->add_option("--scenario", g_scenario, "Preset (sy-mini, vs-mini) or scenario JSON")->required();
  gen_cmd->add_option("--seed", g_seed, "Override the scenario seed");
  gen_cmd->add_option("--horizon", g_horizon, "Override the number of intervals");
  gen_cmd->add_option("--out", g_out, "Output directory")->required();

  // build-graph
  auto* bg_cmd = app.add_subcommand("build-graph", "Extract trips and build the trip graph");
  std::string bg_data, bg_out, bg_traj, bg_net;
  double bg_gap = bench::kGeneratedTripGap, bg_radius = 50.0;
  std::size_t bg_support = 2;
  bg_cmd->add_option("--data", bg_data, "Data directory")->required();
  bg_cmd->add_option("--trajectories", bg_traj, "Trajectory CSV (default DATA/trajectories.csv)");
  bg_cmd->add_option("--network", bg_net, "Network JSON (default DATA/network.json)");
  bg_cmd->add_option("--gap", bg_gap, "Trip split gap in seconds")->capture_default_str();
  bg_cmd->add_option("--snap-radius", bg_radius, "Map-matching radius")->capture_default_str();
  bg_cmd->add_option("--min-support", bg_support, "Trips needed to keep a path")->capture_default_str();
  bg_cmd->add_option("--out", bg_out, "Output graph (default DATA/trip_graph.json)");

  // shared training flags
  std::string data_dir, graph_path, config_path, out_path, init_path, curve_path, variant_name = "TraffNet";
  std::optional<std::uint64_t> seed;
  std::size_t epochs = 30, batch = 8, max_steps = 0, patience = 20;
  double lr = 1e-3, beta = 1.0, weight_decay = 0.0;

  auto* pre_cmd = app.add_subcommand("pretrain", "Fit the route-learning module on path volumes");
  pre_cmd->add_option("--data", data_dir, "Data directory")->required();
  pre_cmd->add_option("--graph", graph_path, "Trip graph (default DATA/trip_graph.json)");
  pre_cmd->add_option("--variant", variant_name, "TraffNet, TraffNet-noOD or TraffNet-noTF")->capture_default_str();
  pre_cmd->add_option("--config", config_path, "Model config JSON");
  pre_cmd->add_option("--seed", seed, "Model and shuffle seed");
  pre_cmd->add_option("--epochs", epochs, "Epochs")->capture_default_str();
  pre_cmd->add_option("--batch", batch, "Batch size")->capture_default_str();
  pre_cmd->add_option("--lr", lr, "Learning rate")->capture_default_str();
  pre_cmd->add_option("--out", out_path, "Checkpoint to write")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a forecaster on the forecast loss");
  train_cmd->add_option("--data", data_dir, "Data directory")->required();
  train_cmd->add_option("--graph", graph_path, "Trip graph (default DATA/trip_graph.json)");
  train_cmd->add_option("--variant", variant_name, "TraffNet, TraffNet-noOD, TraffNet-noTF or GRU")
      ->capture_default_str();
  train_cmd->add_option("--init", init_path, "Start from this checkpoint (e.g. a pretrained one)");
  train_cmd->add_option("--config", config_path, "Model config JSON (ignored with --init)");
  train_cmd->add_option("--seed", seed, "Model and shuffle seed");
  train_cmd->add_option("--epochs", epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--max-steps", max_steps, "Step cap, 0 for none")->capture_default_str();
  train_cmd->add_option("--patience", patience, "Validation checks without improvement")->capture_default_str();
  train_cmd->add_option("--batch", batch, "Batch size")->capture_default_str();
  train_cmd->add_option("--lr", lr, "Learning rate")->capture_default_str();
  train_cmd->add_option("--weight-decay", weight_decay, "Decoupled weight decay")->capture_default_str();
  train_cmd->add_option("--beta", beta, "Loss weight on event-affected cells")->capture_default_str();
  train_cmd->add_option("--curve", curve_path, "Write the training curve CSV here");
  train_cmd->add_option("--out", out_path, "Checkpoint to write")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Score checkpoints and baselines on the test split");
  std::vector<std::string> eval_models;
  std::string eval_out;
  eval_cmd->add_option("--data", data_dir, "Data directory")->required();
  eval_cmd->add_option("--graph", graph_path, "Trip graph (default DATA/trip_graph.json)");
  eval_cmd->add_option("--model", eval_models, "VARIANT=CHECKPOINT, repeatable")->required();
  eval_cmd->add_option("--out", eval_out, "Directory for metrics.csv and summary.json")->required();

  // online / whatif / serve
  std::string checkpoint;
  std::size_t phi = 12;
  bool frozen = false;
  double online_lr = 1e-3;

  auto* online_cmd = app.add_subcommand("online", "Replay a stream with periodic online updates");
  online_cmd->add_option("--checkpoint", checkpoint, "Checkpoint")->required();
  online_cmd->add_option("--data", data_dir, "Data directory holding the stream")->required();
  online_cmd->add_option("--graph", graph_path, "Trip graph (default DATA/trip_graph.json)");
  online_cmd->add_option("--phi", phi, "Update period in intervals")->capture_default_str();
  online_cmd->add_option("--lr", online_lr, "Online learning rate")->capture_default_str();
  online_cmd->add_option("--beta", beta, "Loss weight on event-affected cells")->capture_default_str();
  online_cmd->add_flag("--frozen", frozen, "Disable updates");
  online_cmd->add_option("--out", out_path, "Per-interval CSV")->required();

  auto* whatif_cmd = app.add_subcommand("whatif", "Forecast under hypothetical events");
  std::size_t at = 0;
  std::string events_path;
  whatif_cmd->add_option("--checkpoint", checkpoint, "Checkpoint")->required();
  whatif_cmd->add_option("--data", data_dir, "Data directory holding the stream")->required();
  whatif_cmd->add_option("--graph", graph_path, "Trip graph (default DATA/trip_graph.json)");
  whatif_cmd->add_option("--at", at, "Intervals to replay before forecasting")->required();
  whatif_cmd->add_option("--events", events_path, "What-if request JSON")->required();
  whatif_cmd->add_option("--out", out_path, "Response JSON")->required();

  auto* serve_cmd = app.add_subcommand("serve", "HTTP gateway over a replayed stream");
  std::string host = "127.0.0.1";
  std::optional<int> port;
  serve_cmd->add_option("--checkpoint", checkpoint, "Checkpoint")->required();
  serve_cmd->add_option("--data", data_dir, "Data directory (default $TRAFFNET_DATA_DIR)");
  serve_cmd->add_option("--graph", graph_path, "Trip graph (default DATA/trip_graph.json)");
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port (default $TRAFFNET_PORT or 8080)");
  serve_cmd->add_option("--phi", phi, "Update period in intervals")->capture_default_str();
  serve_cmd->add_option("--lr", online_lr, "Online learning rate")->capture_default_str();
  serve_cmd->add_flag("--frozen", frozen, "Disable online updates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (gen_cmd->parsed()) {
      const gen::Scenario sc = scenario_arg(g_scenario, g_seed, g_horizon);
      const gen::GroundTruth gt = gen::generate(sc);
      fs::create_directories(g_out);
      gen::save_scenario(sc, (fs::path(g_out) / "scenario.json").string());
      trip::save_network(sc.net, (fs::path(g_out) / "network.json").string());
      gen::save_ground_truth(sc, gt, g_out);
      std::cout << "generated " << sc.name << " seed " << sc.seed << ": " << gt.trips.size() << " vehicles over "
                << sc.horizon << " intervals\n";
    } else if (bg_cmd->parsed()) {
      const fs::path dir(bg_data);
      const auto net = trip::load_network(bg_net.empty() ? (dir / "network.json").string() : bg_net);
      const auto traj = trip::trajectories_from_csv(
          read_file(bg_traj.empty() ? (dir / "trajectories.csv").string() : bg_traj));
      double interval = 120.0;
      if (fs::exists(dir / "scenario.json")) interval = gen::load_scenario((dir / "scenario.json").string()).interval_seconds;
      const auto trips = trip::extract_trips(traj, net, {bg_radius}, {bg_gap, interval, 0.0, {}});
      const auto graph = trip::build_trip_graph(trips, net, {.min_support = bg_support});
      const std::string out = bg_out.empty() ? (dir / "trip_graph.json").string() : bg_out;
      trip::save_trip_graph(graph, out);
      std::cout << trips.size() << " trips, " << graph.od_nodes.size() << " ODs, " << graph.path_nodes.size()
                << " paths\n";
    } else if (pre_cmd->parsed()) {
      const DataDir d = load_data(data_dir, graph_path);
      const auto v = bench::variant_from_name(variant_name);
      if (v == bench::Variant::kGru || !bench::trainable(v)) throw ContractError("pretrain needs a TraffNet variant");
      const auto mc = model_config(config_path, seed);
      const auto norm = fit_normalizer(d);
      const auto data = dataset(d, norm, mc.forecast);
      const auto volumes = d.path_volumes();
      if (volumes.empty()) throw ContractError("pretrain needs scenario.json and path_volumes.csv in " + data_dir);
      auto m = fresh_model(v, d, mc);
      train::PretrainConfig pc;
      pc.epochs = epochs;
      pc.batch_size = batch;
      pc.adam.lr = lr;
      pc.seed = mc.seed;
      const auto r = train::pretrain_route(dynamic_cast<model::TraffNetModel&>(*m), data, volumes, pc);
      train::save_checkpoint(out_path, *m, norm, {mc.seed, d.dataset_id(), 0, ""});
      std::cout << "route loss " << format_double(r.initial_loss) << " -> " << format_double(r.final_loss)
                << (r.degenerate ? " (single-path ODs only)" : "") << "\n";
    } else if (train_cmd->parsed()) {
      const DataDir d = load_data(data_dir, graph_path);
      const auto v = bench::variant_from_name(variant_name);
      std::unique_ptr<model::Forecaster> m;
      train::Normalizer norm;
      if (!init_path.empty()) {
        auto ck = train::load_checkpoint(init_path);
        m = std::move(ck.model);
        norm = ck.normalizer;
        check_variant(*m, v, init_path);
      } else {
        m = fresh_model(v, d, model_config(config_path, seed));
        norm = fit_normalizer(d);
      }
      const auto data = dataset(d, norm, m->config().forecast);
      train::TrainConfig tc;
      tc.adam.lr = lr;
      tc.adam.weight_decay = weight_decay;
      tc.batch_size = batch;
      tc.max_epochs = epochs;
      tc.max_steps = max_steps;
      tc.patience = patience;
      tc.event_beta = beta;
      tc.seed = seed.value_or(m->config().seed);
      train::TrainState state;
      const auto r = train::offline_train(*m, data, tc, state);
      train::save_checkpoint(out_path, *m, norm, {tc.seed, d.dataset_id(), r.steps, ""}, &state.adam);
      if (!curve_path.empty()) write_file(curve_path, train::curve_to_csv(r));
      std::cout << r.steps << " steps, best validation loss " << format_double(r.best_validation) << " at step "
                << r.best_step << (r.early_stopped ? " (early stop)" : "") << "\n";
    } else if (eval_cmd->parsed()) {
      const DataDir d = load_data(data_dir, graph_path);
      std::vector<train::LoadedCheckpoint> loaded;
      std::map<bench::Variant, const model::Forecaster*> models;
      bench::SuiteConfig sc;
      sc.variants = {bench::Variant::kHa};
      for (const auto& spec : eval_models) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ContractError("--model expects VARIANT=CHECKPOINT, got " + spec);
        const auto v = bench::variant_from_name(spec.substr(0, eq));
        if (models.count(v) != 0) throw ContractError("variant " + spec.substr(0, eq) + " given twice");
        loaded.push_back(train::load_checkpoint(spec.substr(eq + 1)));
        check_variant(*loaded.back().model, v, spec.substr(eq + 1));
        if (loaded.size() > 1 && (loaded.back().normalizer != loaded.front().normalizer ||
                                  loaded.back().model->config().forecast != loaded.front().model->config().forecast)) {
          throw ContractError(spec + " was trained on different data or windows than the first checkpoint");
        }
        models[v] = loaded.back().model.get();
        sc.variants.push_back(v);
      }
      sc.model = loaded.front().model->config();
      const auto data = dataset(d, loaded.front().normalizer, sc.model.forecast);
      auto report = bench::run_suite(data, sc, models, d.true_shares(), d.dataset_id());
      report.seed = loaded.front().meta.seed;
      fs::create_directories(eval_out);
      write_file((fs::path(eval_out) / "metrics.csv").string(), bench::report_to_csv(report));
      write_file((fs::path(eval_out) / "summary.json").string(), bench::report_to_json(report));
      for (const auto& r : report.rows) {
        if (r.subset == "all" && r.horizon == 1) {
          std::cout << r.variant << " h1 RMSE " << format_double(r.metrics.rmse) << "\n";
        }
      }
    } else if (online_cmd->parsed()) {
      const DataDir d = load_data(data_dir, graph_path);
      auto ck = train::load_checkpoint(checkpoint);
      train::OnlineConfig oc;
      oc.phi = phi;
      oc.adam.lr = online_lr;
      oc.event_beta = beta;
      oc.updates_enabled = !frozen;
      train::OnlineLearner learner(*ck.model, ck.normalizer, oc);
      const auto& graph = d.require_graph();
      std::string csv = "t,model_version,updated,h1_rmse\n";
      double sq = 0.0;
      std::size_t scored = 0;
      std::vector<std::vector<double>> pending;  // h1 forecast of the interval about to arrive
      for (std::size_t t = 0; t < d.panel.num_intervals(); ++t) {
        const auto raw = train::raw_interval(d.panel, graph, t);
        std::string err;
        if (!pending.empty()) {
          double s = 0.0;
          for (std::size_t i = 0; i < raw.volume.size(); ++i) s += std::pow(pending[0][i] - raw.volume[i], 2);
          err = format_double(std::sqrt(s / static_cast<double>(raw.volume.size())));
          sq += s;
          scored += raw.volume.size();
        }
        const auto step = learner.ingest(raw, d.affected.empty() ? std::vector<bool>{} : d.affected.at(t));
        pending = step.forecast;
        csv += std::to_string(step.t) + "," + std::to_string(step.version) + "," + (step.updated ? "1" : "0") + "," +
               err + "\n";
      }
      write_file(out_path, csv);
      std::cout << learner.updates() << " updates, h1 RMSE "
                << (scored ? format_double(std::sqrt(sq / static_cast<double>(scored))) : std::string("n/a")) << "\n";
    } else if (whatif_cmd->parsed()) {
      const DataDir d = load_data(data_dir, graph_path);
      auto session = make_session(checkpoint, d, phi, true, online_lr);
      if (at > d.panel.num_intervals()) throw ContractError("--at is past the end of the stream");
      while (session->cursor() < at) session->step();
      const auto r = session->whatif(read_file(events_path));
      if (r.status != 200) {
        const auto j = nlohmann::json::parse(r.body, nullptr, false);
        throw ContractError(j.is_object() && j.contains("error") ? j["error"].get<std::string>() : r.body);
      }
      write_file(out_path, r.body + "\n");
    } else if (serve_cmd->parsed()) {
      if (data_dir.empty()) data_dir = env_or("TRAFFNET_DATA_DIR", "");
      if (data_dir.empty()) throw ContractError("serve needs --data or TRAFFNET_DATA_DIR");
      const int p = port.value_or(std::stoi(env_or("TRAFFNET_PORT", "8080")));
      const DataDir d = load_data(data_dir, graph_path);
      auto session = make_session(checkpoint, d, phi, frozen, online_lr);
      std::cout << "serving on " << host << ":" << p << std::endl;
      gateway::serve(*session, host, p);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
