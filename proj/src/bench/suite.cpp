#include "traffnet/bench/suite.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "traffnet/common/error.hpp"
#include "traffnet/common/text.hpp"

namespace traffnet::bench {

namespace {

const std::map<Variant, std::string>& names() {
  static const std::map<Variant, std::string> n = {{Variant::kTraffNet, "TraffNet"},
                                                   {Variant::kNoOd, "TraffNet-noOD"},
                                                   {Variant::kNoTf, "TraffNet-noTF"},
                                                   {Variant::kHa, "HA"},
                                                   {Variant::kGru, "GRU"}};
  return n;
}

nlohmann::ordered_json metrics_json(const HorizonMetrics& m) {
  return {{"rmse", m.rmse}, {"mae", m.mae}, {"mean_error", m.mean_error}, {"cells", m.cells}};
}

}  // namespace

std::string variant_name(Variant v) { return names().at(v); }

Variant variant_from_name(const std::string& name) {
  for (const auto& [v, n] : names()) {
    if (n == name) return v;
  }
  throw ContractError("unknown variant '" + name + "'");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v = {Variant::kTraffNet, Variant::kNoOd, Variant::kNoTf,
                                         Variant::kHa, Variant::kGru};
  return v;
}

bool trainable(Variant v) { return v != Variant::kHa; }

Forecasts align_route_shares(const gen::Scenario& scenario, const gen::GroundTruth& truth,
                             const trip::TripGraph& graph) {
  // graph od -> (scenario od, per graph path the scenario path index or npos)
  struct Map {
    std::size_t od = trip::TripGraph::npos;
    std::vector<std::size_t> paths;
  };
  std::vector<Map> maps(graph.od_nodes.size());
  for (std::size_t k = 0; k < graph.od_nodes.size(); ++k) {
    const auto& g = graph.od_nodes[k];
    for (std::size_t s = 0; s < scenario.ods.size(); ++s) {
      if (scenario.ods[s].od.origin != g.origin || scenario.ods[s].od.destination != g.destination) continue;
      maps[k].od = s;
      for (const std::size_t p : graph.paths_of(k)) {
        const auto& seq = graph.path_nodes[p].segment_seq;
        const auto& cand = scenario.ods[s].paths;
        const auto it = std::find(cand.begin(), cand.end(), seq);
        maps[k].paths.push_back(it == cand.end() ? trip::TripGraph::npos
                                                 : static_cast<std::size_t>(it - cand.begin()));
      }
    }
  }
  Forecasts out;
  for (const auto& interval : truth.route_shares) {
    std::vector<std::vector<double>> row;
    for (std::size_t k = 0; k < graph.od_nodes.size(); ++k) {
      const std::size_t n = graph.paths_of(k).size();
      if (maps[k].od == trip::TripGraph::npos) {
        row.emplace_back(n, 1.0 / static_cast<double>(n));
        continue;
      }
      std::vector<double> shares;
      for (const std::size_t idx : maps[k].paths) {
        shares.push_back(idx == trip::TripGraph::npos ? 0.0 : interval[maps[k].od][idx]);
      }
      row.push_back(std::move(shares));
    }
    out.push_back(std::move(row));
  }
  return out;
}

VariantModel train_variant(Variant v, const SuiteInputs& inputs, const train::Dataset& data,
                           const SuiteConfig& config) {
  if (!trainable(v)) throw ContractError(variant_name(v) + " has nothing to train");
  VariantModel out;
  model::ModelConfig mc = config.model;
  if (v == Variant::kGru) {
    out.model = std::make_unique<model::GruBaseline>(inputs.net->size(), mc);
  } else {
    mc.no_od = v == Variant::kNoOd;
    mc.no_tf = v == Variant::kNoTf;
    auto m = std::make_unique<model::TraffNetModel>(*inputs.net, *inputs.graph, mc);
    if (config.pretrain_route && !inputs.path_volumes.empty()) {
      out.pretrain = train::pretrain_route(*m, data, inputs.path_volumes, config.pretrain);
    }
    out.model = std::move(m);
  }
  out.training = train::offline_train(*out.model, data, config.train, out.state);
  return out;
}

const MetricsRow& MetricsReport::row(const std::string& variant, const std::string& subset,
                                     std::size_t horizon) const {
  for (const auto& r : rows) {
    if (r.variant == variant && r.subset == subset && r.horizon == horizon) return r;
  }
  throw ContractError("no metrics row for " + variant + "/" + subset + "/h" + std::to_string(horizon));
}

Forecasts variant_forecasts(Variant v, const model::Forecaster* model, const train::Dataset& data,
                            const std::vector<std::size_t>& starts) {
  const auto& fc = data.forecast();
  if (v == Variant::kHa) {
    Forecasts out;
    for (const std::size_t a : starts) {
      std::vector<std::vector<double>> history;
      for (std::size_t t = a; t < a + fc.window; ++t) history.push_back(data.volume(t));
      out.push_back(ha_forecast(history, fc.horizon));
    }
    return out;
  }
  if (model == nullptr) throw ContractError("missing model for variant " + variant_name(v));
  return train::predict(*model, data, starts);
}

Forecasts observed(const train::Dataset& data, const std::vector<std::size_t>& starts) {
  const auto& fc = data.forecast();
  Forecasts out;
  for (const std::size_t a : starts) {
    std::vector<std::vector<double>> rows;
    for (std::size_t h = 0; h < fc.horizon; ++h) rows.push_back(data.volume(a + fc.window + h));
    out.push_back(std::move(rows));
  }
  return out;
}

MetricsReport run_suite(const train::Dataset& data, const SuiteConfig& config,
                        const std::map<Variant, const model::Forecaster*>& models,
                        const Forecasts& true_shares, const std::string& dataset_id) {
  const auto starts = data.samples(train::Split::kTest);
  if (starts.empty()) throw ContractError("test split holds no samples");
  for (const Variant v : config.variants) {
    if (trainable(v) && (!models.contains(v) || models.at(v) == nullptr)) {
      throw ContractError("missing checkpoint for variant " + variant_name(v));
    }
  }
  const auto& fc = data.forecast();
  const Forecasts truth = observed(data, starts);

  std::optional<Mask> mask;
  if (data.has_events()) {
    Mask m;
    bool any = false;
    for (const std::size_t a : starts) {
      std::vector<std::vector<bool>> rows;
      for (std::size_t h = 0; h < fc.horizon; ++h) {
        rows.push_back(data.affected(a + fc.window + h));
        any = any || std::find(rows.back().begin(), rows.back().end(), true) != rows.back().end();
      }
      m.push_back(std::move(rows));
    }
    if (any) mask = std::move(m);
  }

  MetricsReport report;
  report.seed = config.model.seed;
  report.config_hash = model::config_hash(config.model);
  report.dataset_id = dataset_id;
  for (const Variant v : config.variants) {
    const model::Forecaster* m = trainable(v) ? models.at(v) : nullptr;
    const Forecasts pred = variant_forecasts(v, m, data, starts);
    const auto all = compute_metrics(truth, pred);
    for (std::size_t h = 0; h < all.size(); ++h) report.rows.push_back({variant_name(v), "all", h + 1, all[h]});
    if (mask) {
      for (std::size_t h = 0; h < fc.horizon; ++h) {
        // A horizon step can miss every event; its affected row is skipped.
        try {
          Forecasts yh, ph;
          Mask mh;
          for (std::size_t s = 0; s < starts.size(); ++s) {
            yh.push_back({truth[s][h]});
            ph.push_back({pred[s][h]});
            mh.push_back({(*mask)[s][h]});
          }
          report.rows.push_back({variant_name(v), "affected", h + 1, compute_metrics(yh, ph, &mh)[0]});
        } catch (const ContractError&) {
        }
      }
    }
  }

  if (!true_shares.empty() && models.contains(Variant::kTraffNet)) {
    const auto* tn = dynamic_cast<const model::TraffNetModel*>(models.at(Variant::kTraffNet));
    if (tn != nullptr) {
      std::vector<std::size_t> intervals;
      for (std::size_t t = data.bounds().validation_end; t < data.bounds().end; ++t) intervals.push_back(t);
      Forecasts truth_rows;
      for (const std::size_t t : intervals) truth_rows.push_back(true_shares.at(t));
      report.route_accuracy = route_share_accuracy(train::predict_route_shares(*tn, data, intervals), truth_rows);
    }
  }
  return report;
}

std::string report_to_csv(const MetricsReport& report) {
  std::string out = "variant,subset,horizon,rmse,mae,cells\n";
  for (const auto& r : report.rows) {
    out += r.variant + "," + r.subset + "," + std::to_string(r.horizon) + "," +
           format_double(r.metrics.rmse) + "," + format_double(r.metrics.mae) + "," +
           std::to_string(r.metrics.cells) + "\n";
  }
  return out;
}

std::string report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json doc;
  doc["schema_version"] = 1;
  doc["seed"] = report.seed;
  doc["config_hash"] = report.config_hash;
  doc["dataset_id"] = report.dataset_id;
  if (report.route_accuracy) {
    doc["route_share_accuracy"] = {{"argmax", report.route_accuracy->argmax},
                                   {"l1", report.route_accuracy->l1},
                                   {"cases", report.route_accuracy->cases}};
  } else {
    doc["route_share_accuracy"] = nullptr;
  }
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    auto j = metrics_json(r.metrics);
    j["variant"] = r.variant;
    j["subset"] = r.subset;
    j["horizon"] = r.horizon;
    rows.push_back(std::move(j));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace traffnet::bench
