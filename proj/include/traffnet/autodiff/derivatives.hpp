#pragma once

namespace traffnet::ad::detail {

/// Derivative of an elementwise map given its input x and output y.
using UnaryDerivative = double (*)(double x, double y);

double tanh_derivative_reference(double x, double y);
UnaryDerivative tanh_derivative();
/// Test hook: swaps the tanh backward rule so gradient checks can be shown
/// to catch a wrong derivative. Pass nullptr to restore the reference rule.
void set_tanh_derivative(UnaryDerivative fn);

}  // namespace traffnet::ad::detail
