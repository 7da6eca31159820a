#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "traffnet/autodiff/tensor.hpp"

namespace traffnet::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// tape is alive.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  double item() const;

  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records primitive applications in creation order; backward walks them in
/// reverse. Gradients accumulate additively when a value fans out.
class Tape {
 public:
  /// Called during backward with the node's own id and output gradient.
  /// Implementations push contributions into parents through accumulate().
  using BackwardFn =
      std::function<void(Tape&, std::size_t self, std::span<const double> out_grad)>;

  explicit Tape(bool record_gradients = true) : record_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  /// Leaf whose gradient is readable through grad() after backward.
  Var input(Tensor value);
  /// Leaf bound to a parameter; backward adds into parameter.grad.
  Var param(Parameter& parameter);

  /// Appends a primitive result. Throws NumericError on non-finite values.
  Var record(Tensor value, std::span<const Var> parents, BackwardFn backward,
             const char* op_name);

  void backward(Var loss);

  /// Gradient of the last backward pass w.r.t. v; zeros when v did not
  /// participate.
  std::vector<double> grad(Var v) const;

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  /// Adds delta into the gradient buffer of node id (no-op for nodes that do
  /// not need gradients).
  void accumulate(std::size_t id, std::span<const double> delta);
  /// Mutable gradient buffer of node id, allocated on first use.
  std::vector<double>& grad_buffer(std::size_t id);

  std::size_t size() const noexcept { return nodes_.size(); }
  bool records_gradients() const noexcept { return record_; }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    BackwardFn backward;
    Parameter* parameter = nullptr;
    bool needs_grad = false;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  bool record_;
};

}  // namespace traffnet::ad
