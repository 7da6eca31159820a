#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>

#include "traffnet/autodiff/tape.hpp"

namespace traffnet::ad {

// Matrix products. A rank-1 right operand is treated as a column vector and
// the result is rank 1.
Var matmul(Var a, Var b);
/// w·x + b for a matrix w, vector x and vector b, fused into one node.
Var affine(Var w, Var x, Var b);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
/// Multiplies every element of v by the one-element tensor s.
Var scale(Var v, Var s);
Var scale(Var v, double c);

Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
/// Elements [offset, offset + length) of a vector.
Var slice(Var v, std::size_t offset, std::size_t length);
/// The k-th (1-based) consecutive sub-vector of length n.
Var subvector(Var v, std::size_t k, std::size_t n);

Var sigmoid(Var v);
Var tanh(Var v);
Var relu(Var v);
Var leaky_relu(Var v, double slope = 0.01);

/// Softmax over every entry of v (the caller concatenates the index set).
Var softmax(Var v);
Var softmax(std::span<const Var> scalars);

/// Index-ascending sum to a scalar.
Var sum(Var v);
Var mse(Var prediction, Var target);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double c, Var v) { return scale(v, c); }

}  // namespace traffnet::ad
