#include "traffnet/autodiff/tape.hpp"

#include <algorithm>

#include "traffnet/common/error.hpp"

namespace traffnet::ad {

const Tensor& Var::value() const { return tape_->value(id_); }

double Var::item() const {
  const Tensor& v = value();
  if (v.size() != 1) {
    throw ContractError("item() on non-scalar of shape " + to_string(v.shape()));
  }
  return v[0];
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.value.set_requires_grad(false);
  return push(std::move(node));
}

Var Tape::input(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.value.set_requires_grad(true);
  node.needs_grad = record_;
  return push(std::move(node));
}

Var Tape::param(Parameter& parameter) {
  Node node;
  node.value = parameter.value;
  node.parameter = &parameter;
  node.needs_grad = record_;
  return push(std::move(node));
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn backward,
                 const char* op_name) {
  if (!value.all_finite()) {
    throw NumericError(std::string("non-finite value produced by ") + op_name);
  }
  Node node;
  node.value = std::move(value);
  if (record_) {
    node.needs_grad = std::any_of(parents.begin(), parents.end(),
                                  [this](const Var& p) { return nodes_[p.id()].needs_grad; });
    if (node.needs_grad) node.backward = std::move(backward);
  }
  return push(std::move(node));
}

std::vector<double>& Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::accumulate(std::size_t id, std::span<const double> delta) {
  if (!nodes_[id].needs_grad) return;
  std::vector<double>& g = grad_buffer(id);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
}

void Tape::backward(Var loss) {
  if (loss.tape_ != this) throw ContractError("loss belongs to a different tape");
  if (!record_) throw ContractError("backward on a tape that does not record gradients");
  if (loss.size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " + to_string(loss.shape()));
  }
  for (Node& node : nodes_) node.grad.clear();
  if (!nodes_[loss.id()].needs_grad) return;
  grad_buffer(loss.id())[0] = 1.0;

  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& node = nodes_[id];
    if (node.grad.empty()) continue;
    if (node.backward) {
      // Parents always precede the node, so the callback never touches it.
      std::vector<double> out_grad = std::move(node.grad);
      BackwardFn fn = std::move(node.backward);
      fn(*this, id, out_grad);
      nodes_[id].grad = std::move(out_grad);
      nodes_[id].backward = std::move(fn);
    }
    Node& done = nodes_[id];
    if (done.parameter != nullptr) {
      std::vector<double>& target = done.parameter->grad;
      if (target.size() != done.grad.size()) target.assign(done.grad.size(), 0.0);
      for (std::size_t i = 0; i < target.size(); ++i) target[i] += done.grad[i];
    }
  }
}

std::vector<double> Tape::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (node.grad.empty()) return std::vector<double>(node.value.size(), 0.0);
  return node.grad;
}

}  // namespace traffnet::ad
