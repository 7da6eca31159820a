#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "traffnet/trainer/checkpoint.hpp"
#include "traffnet/trainer/online.hpp"
#include "traffnet/tripgraph/panel.hpp"

namespace traffnet::gateway {

inline constexpr int kApiSchemaVersion = 1;

struct Response {
  int status = 200;
  std::string body;  // JSON
};

struct SessionConfig {
  std::size_t phi = 12;
  bool online_updates = true;
  train::AdamConfig adam;
};

/// What-if events scale the volume and speed observations of their segment
/// by capacity_factor over the input window. `start`/`end` are stream
/// interval indices; without them the event covers the whole window.
struct WhatIfEvent {
  trip::NodeId segment = 0;
  double capacity_factor = 0.1;
  std::optional<std::size_t> start, end;
};

struct WhatIfRequest {
  std::vector<WhatIfEvent> events;
  std::optional<std::size_t> horizon;
};

/// One live session: a loaded checkpoint replaying a recorded stream through
/// the online learner. Every public call takes the session lock, so requests
/// are served one at a time in arrival order.
class Session {
 public:
  Session(train::LoadedCheckpoint checkpoint, trip::RoadNetwork net, trip::TripGraph graph,
          trip::DemandVolumePanel stream, std::vector<std::vector<bool>> affected,
          SessionConfig config);

  Response network() const;
  Response state() const;
  /// Ingests the next recorded interval. 409 while warming up (the interval
  /// is still ingested) and once the stream is exhausted.
  Response step();
  Response forecast() const;
  /// Forecast under hypothetical events next to the unmodified baseline.
  /// Leaves the session untouched.
  Response whatif(const std::string& body) const;

  std::size_t cursor() const;
  std::size_t version() const;

 private:
  Response warm_up_error() const;

  mutable std::mutex mu_;
  train::LoadedCheckpoint checkpoint_;
  trip::RoadNetwork net_;
  trip::TripGraph graph_;
  trip::DemandVolumePanel stream_;
  std::vector<std::vector<bool>> affected_;
  SessionConfig config_;
  std::unique_ptr<train::OnlineLearner> learner_;
};

/// Parses and validates a what-if body. Throws ContractError (malformed,
/// maps to 400) or ValidationError (unknown segment, maps to 404).
WhatIfRequest parse_whatif(const std::string& body, const trip::RoadNetwork& net,
                           std::size_t max_horizon);

}  // namespace traffnet::gateway
