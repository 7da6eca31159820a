#pragma once

#include <vector>

namespace traffnet::model {

/// Model-ready observations of one interval.
struct IntervalFeatures {
  std::vector<double> demand;  // per OD node, divided by the demand scale
  std::vector<double> volume;  // per network node, z-scored
  std::vector<double> speed;   // per network node, z-scored
};

}  // namespace traffnet::model
