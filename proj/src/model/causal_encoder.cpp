#include "traffnet/model/causal_encoder.hpp"

#include <algorithm>
#include <string>

#include "traffnet/common/error.hpp"

namespace traffnet::model {

CausalEncoder::CausalEncoder(const trip::RoadNetwork& net, const trip::TripGraph& graph,
                             const ModelConfig& config, ParamStore& store, std::mt19937_64& rng)
    : net_(net), graph_(graph), config_(config) {
  max_path_length_ = config.max_path_length ? config.max_path_length : graph.max_path_length();
  if (max_path_length_ == 0) throw ContractError("trip graph has no paths");
  if (config.gru_hidden == 0 || config.gru_layers == 0 || config.gat_heads == 0) {
    throw ContractError("model widths must be positive");
  }

  double max_len = 0.0, max_cap = 0.0, max_speed = 0.0;
  for (std::size_t i = 0; i < net.size(); ++i) {
    max_len = std::max(max_len, net.node(i).length);
    max_cap = std::max(max_cap, net.node(i).capacity);
    max_speed = std::max(max_speed, net.node(i).free_speed);
  }
  auto ratio = [](double v, double m) { return m > 0.0 ? v / m : 0.0; };
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto& node = net.node(i);
    static_features_.push_back({ratio(node.length, max_len), ratio(node.capacity, max_cap),
                                ratio(node.free_speed, max_speed)});
  }

  od_paths_.resize(graph.od_nodes.size());
  for (std::size_t k = 0; k < graph.od_nodes.size(); ++k) od_paths_[k] = graph.paths_of(k);

  incidence_.resize(net.size());
  for (const auto& e : graph.edges_rprime) {
    if (e.node_id >= net.size()) throw ValidationError("path edge to unknown segment");
    if (e.order == 0 || e.order > max_path_length_) {
      throw ValidationError("path " + std::to_string(e.path_id) + " order " +
                            std::to_string(e.order) + " exceeds max path length");
    }
    incidence_[e.node_id].emplace_back(e.path_id, e.order);
  }
  for (auto& list : incidence_) std::sort(list.begin(), list.end());

  const std::size_t h = config.gru_hidden;
  std::size_t in = input_width();
  for (std::size_t l = 0; l < config.gru_layers; ++l) {
    const std::string base = "causal.path_gru.l" + std::to_string(l);
    forward_cells_.push_back(GruCell::create(store, base + ".fwd", in, h, rng));
    backward_cells_.push_back(GruCell::create(store, base + ".bwd", in, h, rng));
    in = 2 * h;
  }

  const std::size_t g = config.gat_hidden;
  const std::size_t value_out = config.assign_uses_attended ? padded_width() : g;
  for (std::size_t head = 0; head < config.gat_heads; ++head) {
    const std::string base = "causal.gat.h" + std::to_string(head);
    attn_weight_.push_back(&store.add(base + ".W", {g, padded_width()}, padded_width(), rng));
    attn_value_.push_back(
        &store.add(base + ".W_value", {value_out, padded_width()}, padded_width(), rng));
    attn_vector_.push_back(&store.add(base + ".a", {1, 2 * g}, 2 * g, rng));
  }
  std::size_t attended = config.assign_uses_attended ? padded_width() : g * config.gat_heads;
  if (config.route_skip) attended += padded_width();
  route_mlp_ = Mlp::create(store, "causal.route_mlp", attended, config.route_mlp_hidden, 1,
                           config.route_mlp_layers, rng);
}

ad::Var CausalEncoder::segment_input(ParamBinder& bind, trip::NodeId node,
                                     const IntervalFeatures& f) const {
  if (node >= net_.size()) throw ContractError("segment input for unknown node");
  ad::Tensor x({input_width()});
  auto v = x.values();
  v[node] = 1.0;
  const std::size_t base = net_.size();
  v[base] = static_features_[node][0];
  v[base + 1] = static_features_[node][1];
  v[base + 2] = static_features_[node][2];
  if (!config_.no_tf) {
    if (f.volume.size() != net_.size() || f.speed.size() != net_.size()) {
      throw DimensionError("interval features do not match the network size");
    }
    v[base + 3] = f.volume[node];
    v[base + 4] = f.speed[node];
  }
  return bind.tape().constant(std::move(x));
}

PathEmbedding CausalEncoder::embed_path(ParamBinder& bind, std::span<const ad::Var> segments,
                                        std::size_t path_id) const {
  return embed(bind, segments, path_id, nullptr);
}

PathEmbedding CausalEncoder::embed(ParamBinder& bind, std::span<const ad::Var> segments,
                                   std::size_t path_id, ProjectionCache* cache) const {
  const std::size_t len = segments.size();
  if (len == 0) throw ContractError("empty path");
  if (len > max_path_length_) {
    throw CapacityError("path " + std::to_string(path_id) + " has " + std::to_string(len) +
                        " segments, more than max path length " +
                        std::to_string(max_path_length_));
  }
  const std::size_t h = config_.gru_hidden;
  std::vector<ad::Var> layer(segments.begin(), segments.end());
  for (std::size_t l = 0; l < forward_cells_.size(); ++l) {
    const GruCell& fc = forward_cells_[l];
    const GruCell& bc = backward_cells_[l];
    std::vector<ad::Var> pf(len), pb(len);
    for (std::size_t i = 0; i < len; ++i) {
      if (l == 0 && cache) {
        auto it = cache->find(layer[i].id());
        if (it == cache->end()) {
          it = cache->emplace(layer[i].id(), std::make_pair(fc.project(bind, layer[i]),
                                                            bc.project(bind, layer[i])))
                   .first;
        }
        pf[i] = it->second.first;
        pb[i] = it->second.second;
      } else {
        pf[i] = fc.project(bind, layer[i]);
        pb[i] = bc.project(bind, layer[i]);
      }
    }
    std::vector<ad::Var> fwd(len), bwd(len);
    ad::Var state = bind.zeros(h);
    for (std::size_t i = 0; i < len; ++i) fwd[i] = state = fc.step(bind, pf[i], state);
    state = bind.zeros(h);
    for (std::size_t i = len; i-- > 0;) bwd[i] = state = bc.step(bind, pb[i], state);
    for (std::size_t i = 0; i < len; ++i) layer[i] = ad::concat({fwd[i], bwd[i]});
  }

  PathEmbedding out;
  out.per_segment = layer;
  out.mask.assign(max_path_length_, false);
  std::fill(out.mask.begin(), out.mask.begin() + static_cast<std::ptrdiff_t>(len), true);
  std::vector<ad::Var> parts = layer;
  if (len < max_path_length_) parts.push_back(bind.zeros((max_path_length_ - len) * 2 * h));
  out.concatenated = ad::concat(parts);
  return out;
}

AttentionResult CausalEncoder::meta_path_attention(
    ParamBinder& bind, std::span<const ad::Var> path_embeddings) const {
  const std::size_t count = path_embeddings.size();
  if (count == 0) throw ContractError("attention over an OD with no paths");
  for (const auto& e : path_embeddings) {
    if (e.size() != padded_width()) throw DimensionError("path embedding has the wrong width");
  }
  const std::size_t heads = attn_weight_.size();
  AttentionResult out;
  std::vector<std::vector<ad::Var>> per_head(count);
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const ad::Var w = bind(*attn_weight_[hd]);
    const ad::Var wv = bind(*attn_value_[hd]);
    const ad::Var a = bind(*attn_vector_[hd]);
    std::vector<ad::Var> keys(count), values(count);
    for (std::size_t d = 0; d < count; ++d) {
      keys[d] = ad::matmul(w, path_embeddings[d]);
      values[d] = ad::matmul(wv, path_embeddings[d]);
    }
    for (std::size_t j = 0; j < count; ++j) {
      std::vector<ad::Var> scores(count);
      for (std::size_t d = 0; d < count; ++d) {
        scores[d] = ad::leaky_relu(ad::matmul(a, ad::concat({keys[j], keys[d]})),
                                   config_.leaky_slope);
      }
      const ad::Var alpha = ad::softmax(scores);
      ad::Var acc = ad::scale(values[0], ad::slice(alpha, 0, 1));
      for (std::size_t d = 1; d < count; ++d) {
        acc = acc + ad::scale(values[d], ad::slice(alpha, d, 1));
      }
      per_head[j].push_back(acc);
      out.alpha.push_back(alpha);
    }
  }
  for (std::size_t j = 0; j < count; ++j) {
    if (config_.assign_uses_attended) {
      ad::Var acc = per_head[j][0];
      for (std::size_t hd = 1; hd < heads; ++hd) acc = acc + per_head[j][hd];
      out.attended.push_back(heads > 1 ? ad::scale(acc, 1.0 / static_cast<double>(heads)) : acc);
    } else {
      out.attended.push_back(heads > 1 ? ad::concat(per_head[j]) : per_head[j][0]);
    }
  }
  return out;
}

ad::Var CausalEncoder::route_preferences(ParamBinder& bind, std::span<const ad::Var> attended,
                                         std::span<const ad::Var> own) const {
  if (attended.empty()) throw ContractError("route preferences over no paths");
  if (config_.route_skip && own.size() != attended.size()) {
    throw ContractError("route preferences need each path's own embedding");
  }
  std::vector<ad::Var> scores;
  scores.reserve(attended.size());
  for (std::size_t j = 0; j < attended.size(); ++j) {
    const ad::Var in = config_.route_skip ? ad::concat({attended[j], own[j]}) : attended[j];
    scores.push_back(route_mlp_(bind, in));
  }
  return ad::softmax(scores);
}

std::vector<ad::Var> CausalEncoder::segment_embeddings(ParamBinder& bind,
                                                       std::span<const ad::Var> assigned) const {
  if (assigned.size() != graph_.path_nodes.size()) {
    throw DimensionError("expected one assigned embedding per path");
  }
  const std::size_t n = embedding_width();
  std::vector<ad::Var> out(net_.size());
  for (std::size_t node = 0; node < net_.size(); ++node) {
    const auto& edges = incidence_[node];
    if (edges.empty()) {
      out[node] = bind.zeros(n);
      continue;
    }
    ad::Var acc = ad::subvector(assigned[edges[0].first], edges[0].second, n);
    for (std::size_t e = 1; e < edges.size(); ++e) {
      acc = acc + ad::subvector(assigned[edges[e].first], edges[e].second, n);
    }
    out[node] = acc;
  }
  return out;
}

CausalOutput CausalEncoder::forward(ParamBinder& bind, const IntervalFeatures& features) const {
  if (!config_.no_od && features.demand.size() != graph_.od_nodes.size()) {
    throw DimensionError("interval features do not match the OD count");
  }
  std::vector<ad::Var> inputs(net_.size());
  auto input_of = [&](trip::NodeId node) {
    if (!inputs[node].valid()) inputs[node] = segment_input(bind, node, features);
    return inputs[node];
  };

  ProjectionCache cache;
  std::vector<ad::Var> embeddings(graph_.path_nodes.size());
  for (std::size_t j = 0; j < graph_.path_nodes.size(); ++j) {
    const auto& seq = graph_.path_nodes[j].segment_seq;
    std::vector<ad::Var> segs;
    segs.reserve(seq.size());
    for (const auto node : seq) segs.push_back(input_of(node));
    embeddings[j] = embed(bind, segs, j, &cache).concatenated;
  }

  CausalOutput out;
  std::vector<ad::Var> assigned(graph_.path_nodes.size());
  for (std::size_t k = 0; k < od_paths_.size(); ++k) {
    const auto& paths = od_paths_[k];
    if (paths.empty()) {
      out.route_shares.push_back(ad::Var());
      out.alpha.emplace_back();
      continue;
    }
    std::vector<ad::Var> h;
    for (const auto j : paths) h.push_back(embeddings[j]);
    AttentionResult att = meta_path_attention(bind, h);
    const ad::Var co = route_preferences(bind, att.attended, h);
    const double demand = config_.no_od ? 1.0 : features.demand[k];
    for (std::size_t idx = 0; idx < paths.size(); ++idx) {
      const ad::Var base = config_.assign_uses_attended ? att.attended[idx] : h[idx];
      assigned[paths[idx]] = apply_od_assignment(base, ad::slice(co, idx, 1), demand);
    }
    out.route_shares.push_back(co);
    out.alpha.push_back(std::move(att.alpha));
  }
  for (std::size_t j = 0; j < assigned.size(); ++j) {
    if (!assigned[j].valid()) throw ValidationError("path without an OD");
  }
  out.segment_embeddings = ad::concat(segment_embeddings(bind, assigned));
  return out;
}

ad::Var apply_od_assignment(ad::Var embedding, ad::Var share, double demand) {
  if (!(demand >= 0.0)) throw ValidationError("negative OD demand");
  return ad::scale(ad::scale(embedding, share), demand);
}

}  // namespace traffnet::model
