#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "traffnet/autodiff/ops.hpp"

namespace traffnet::train {

/// Mean of squared differences. Throws DimensionError on a shape mismatch.
double mse_loss(std::span<const double> y, std::span<const double> y_hat);

/// (1/(|V| L)) [sum over affected cells of beta (y - y_hat)^2 + sum over the
/// rest of (y - y_hat)^2]. y and y_hat are [L][|V|]; affected[l] lists the
/// affected segment ids at horizon step l (empty list allowed).
double weighted_event_loss(const std::vector<std::vector<double>>& y,
                           const std::vector<std::vector<double>>& y_hat,
                           const std::vector<std::vector<std::size_t>>& affected, double beta);

/// Differentiable form over one forecast: prediction[l] against target[l]
/// with per-cell weights beta on affected[l] (an empty mask means none).
ad::Var forecast_loss(std::span<const ad::Var> prediction,
                      std::span<const std::vector<double>* const> target,
                      std::span<const std::vector<bool>* const> affected, double beta);

}  // namespace traffnet::train
