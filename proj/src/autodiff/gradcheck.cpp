#include "traffnet/autodiff/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "traffnet/common/error.hpp"

namespace traffnet::ad {

namespace {

double evaluate(const LossBuilder& build) {
  Tape tape(false);
  return build(tape).item();
}

}  // namespace

GradCheckResult check_gradients(const LossBuilder& build, std::span<Parameter* const> params,
                                const GradCheckOptions& options) {
  std::size_t total = 0;
  for (Parameter* p : params) {
    p->zero_grad();
    total += p->value.size();
  }
  if (total == 0) throw ContractError("check_gradients: no parameter coordinates");

  {
    Tape tape;
    tape.backward(build(tape));
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Parameter* p : params) analytic.push_back(p->grad);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  GradCheckResult result;
  for (std::size_t trial = 0; trial < options.trials; ++trial) {
    std::size_t flat = pick(rng);
    std::size_t which = 0;
    while (flat >= params[which]->value.size()) {
      flat -= params[which]->value.size();
      ++which;
    }
    Parameter& p = *params[which];
    const double original = p.value[flat];
    p.value[flat] = original + options.step;
    const double plus = evaluate(build);
    p.value[flat] = original - options.step;
    const double minus = evaluate(build);
    p.value[flat] = original;

    const double numeric = (plus - minus) / (2.0 * options.step);
    const double exact = analytic[which][flat];
    // Rounding in plus - minus limits central differences to about
    // eps*|loss|/step; derivatives below the floor are compared against it.
    const double loss_scale = std::max({1.0, std::abs(plus), std::abs(minus)});
    const double floor = std::max(1e-8, options.resolution_factor *
                                            std::numeric_limits<double>::epsilon() * loss_scale /
                                            options.step);
    const double magnitude = std::abs(exact) + std::abs(numeric);
    if (magnitude < floor) ++result.below_resolution;
    const double err = std::abs(exact - numeric) / std::max(floor, magnitude);
    if (trial == 0 || err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_parameter = p.name;
      result.worst_index = flat;
    }
    ++result.trials;
  }
  return result;
}

}  // namespace traffnet::ad
