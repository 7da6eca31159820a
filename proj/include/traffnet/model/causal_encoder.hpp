#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "traffnet/model/config.hpp"
#include "traffnet/model/features.hpp"
#include "traffnet/model/params.hpp"
#include "traffnet/tripgraph/road_network.hpp"
#include "traffnet/tripgraph/trip_graph.hpp"

namespace traffnet::model {

struct PathEmbedding {
  std::vector<ad::Var> per_segment;  // h_i, one per path position
  ad::Var concatenated;              // zero-padded to max_path_length * n
  std::vector<bool> mask;            // true at occupied positions
};

struct AttentionResult {
  std::vector<ad::Var> attended;  // H' per path
  std::vector<ad::Var> alpha;     // attention over the OD's paths, per path and head
};

struct CausalOutput {
  ad::Var segment_embeddings;              // |V| * n, node order
  std::vector<ad::Var> route_shares;       // per OD: co over paths_of(od)
  std::vector<std::vector<ad::Var>> alpha; // per OD: attention vectors
};

/// Per-interval traffic causality: path embedding, route learning and
/// position-aware segment embedding over a trip graph.
class CausalEncoder {
 public:
  CausalEncoder(const trip::RoadNetwork& net, const trip::TripGraph& graph,
                const ModelConfig& config, ParamStore& store, std::mt19937_64& rng);

  std::size_t embedding_width() const { return 2 * config_.gru_hidden; }
  std::size_t padded_width() const { return max_path_length_ * embedding_width(); }
  std::size_t output_width() const { return net_.size() * embedding_width(); }
  std::size_t max_path_length() const { return max_path_length_; }
  std::size_t input_width() const { return net_.size() + 5; }

  /// One-hot identity, normalized static attributes, dynamic volume/speed.
  ad::Var segment_input(ParamBinder& bind, trip::NodeId node, const IntervalFeatures& f) const;

  /// Stacked bidirectional GRU over the path's segment inputs.
  PathEmbedding embed_path(ParamBinder& bind, std::span<const ad::Var> segments,
                           std::size_t path_id = 0) const;

  /// Meta-path (path-OD-path) attention among the paths of one OD; every
  /// path attends to all of them, itself included.
  AttentionResult meta_path_attention(ParamBinder& bind,
                                      std::span<const ad::Var> path_embeddings) const;

  /// Softmax over the OD's paths of the MLP score of each attended embedding
  /// (joined with the path's own embedding when route_skip is set).
  ad::Var route_preferences(ParamBinder& bind, std::span<const ad::Var> attended,
                            std::span<const ad::Var> own = {}) const;

  /// Sum over incident (path, order k) edges of the k-th width-n block of
  /// the assigned path embeddings, in ascending path id. One entry per
  /// network node; nodes on no path get zeros.
  std::vector<ad::Var> segment_embeddings(ParamBinder& bind,
                                          std::span<const ad::Var> assigned) const;

  CausalOutput forward(ParamBinder& bind, const IntervalFeatures& features) const;

  const trip::TripGraph& graph() const { return graph_; }

 private:
  // Layer-0 input projections (forward, backward) keyed by input node id.
  using ProjectionCache = std::unordered_map<std::size_t, std::pair<ad::Var, ad::Var>>;
  PathEmbedding embed(ParamBinder& bind, std::span<const ad::Var> segments, std::size_t path_id,
                      ProjectionCache* cache) const;

  const trip::RoadNetwork& net_;
  const trip::TripGraph& graph_;
  ModelConfig config_;
  std::size_t max_path_length_;
  std::vector<std::array<double, 3>> static_features_;
  std::vector<std::vector<std::size_t>> od_paths_;
  // Per network node: (path id, 1-based order) in ascending path id.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> incidence_;

  std::vector<GruCell> forward_cells_;   // per layer
  std::vector<GruCell> backward_cells_;  // per layer
  std::vector<ad::Parameter*> attn_weight_;    // W per head
  std::vector<ad::Parameter*> attn_value_;     // W' per head
  std::vector<ad::Parameter*> attn_vector_;    // a per head, [1, 2g]
  Mlp route_mlp_;
};

/// Scaling: demand * share * embedding. Throws ValidationError on
/// negative demand.
ad::Var apply_od_assignment(ad::Var embedding, ad::Var share, double demand);

}  // namespace traffnet::model
