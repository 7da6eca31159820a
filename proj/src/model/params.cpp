#include "traffnet/model/params.hpp"

#include <cmath>

#include "traffnet/common/error.hpp"

namespace traffnet::model {

ad::Parameter& ParamStore::add(const std::string& name, ad::Shape shape, std::size_t fan_in,
                               std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ad::Tensor value(std::move(shape));
  for (double& v : value.values()) v = dist(rng);
  auto [it, inserted] = params_.try_emplace(name, name, std::move(value));
  if (!inserted) throw ContractError("duplicate parameter " + name);
  return it->second;
}

ad::Parameter& ParamStore::add_zeros(const std::string& name, ad::Shape shape) {
  auto [it, inserted] = params_.try_emplace(name, name, ad::Tensor(std::move(shape)));
  if (!inserted) throw ContractError("duplicate parameter " + name);
  return it->second;
}

ad::Parameter& ParamStore::get(const std::string& name) {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter " + name);
  return it->second;
}

const ad::Parameter& ParamStore::get(const std::string& name) const {
  const auto it = params_.find(name);
  if (it == params_.end()) throw ContractError("unknown parameter " + name);
  return it->second;
}

std::vector<ad::Parameter*> ParamStore::list(const std::string& prefix) {
  std::vector<ad::Parameter*> out;
  for (auto& [name, p] : params_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(&p);
  }
  return out;
}

std::vector<const ad::Parameter*> ParamStore::list(const std::string& prefix) const {
  std::vector<const ad::Parameter*> out;
  for (const auto& [name, p] : params_) {
    if (name.rfind(prefix, 0) == 0) out.push_back(&p);
  }
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, p] : params_) p.zero_grad();
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (const auto& [name, p] : params_) {
    const auto it = other.params_.find(name);
    if (it == other.params_.end() || it->second.value != p.value) return false;
  }
  return true;
}

ad::Var ParamBinder::operator()(ad::Parameter& p) {
  const auto it = bound_.find(&p);
  if (it != bound_.end()) return it->second;
  const ad::Var v = tape_.param(p);
  bound_.emplace(&p, v);
  return v;
}

ad::Var ParamBinder::zeros(std::size_t n) {
  const auto it = zeros_.find(n);
  if (it != zeros_.end()) return it->second;
  const ad::Var v = tape_.constant(ad::Tensor({n}));
  zeros_.emplace(n, v);
  return v;
}

Linear Linear::create(ParamStore& store, const std::string& name, std::size_t in, std::size_t out,
                      std::mt19937_64& rng) {
  Linear l;
  l.weight = &store.add(name + ".weight", {out, in}, in, rng);
  l.bias = &store.add(name + ".bias", {out}, in, rng);
  return l;
}

ad::Var Linear::operator()(ParamBinder& bind, ad::Var x) const {
  return ad::affine(bind(*weight), x, bind(*bias));
}

Mlp Mlp::create(ParamStore& store, const std::string& name, std::size_t in, std::size_t hidden,
                std::size_t out, std::size_t depth, std::mt19937_64& rng) {
  if (depth == 0) throw ContractError("MLP depth must be at least 1");
  Mlp m;
  std::size_t width = in;
  for (std::size_t l = 0; l < depth; ++l) {
    const std::size_t next = l + 1 == depth ? out : hidden;
    m.layers.push_back(Linear::create(store, name + ".l" + std::to_string(l), width, next, rng));
    width = next;
  }
  return m;
}

ad::Var Mlp::operator()(ParamBinder& bind, ad::Var x) const {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    x = layers[l](bind, x);
    if (l + 1 < layers.size()) x = ad::relu(x);
  }
  return x;
}

GruCell GruCell::create(ParamStore& store, const std::string& name, std::size_t in,
                        std::size_t hidden, std::mt19937_64& rng) {
  GruCell c;
  c.hidden = hidden;
  c.input_weight = &store.add(name + ".input_weight", {3 * hidden, in}, in, rng);
  c.gate_weight = &store.add(name + ".gate_weight", {2 * hidden, hidden}, hidden, rng);
  c.cand_weight = &store.add(name + ".cand_weight", {hidden, hidden}, hidden, rng);
  c.bias = &store.add(name + ".bias", {3 * hidden}, hidden, rng);
  return c;
}

ad::Var GruCell::project(ParamBinder& bind, ad::Var x) const {
  return ad::affine(bind(*input_weight), x, bind(*bias));
}

ad::Var GruCell::step(ParamBinder& bind, ad::Var projected, ad::Var h) const {
  const std::size_t n = hidden;
  const ad::Var gh = ad::matmul(bind(*gate_weight), h);
  const ad::Var z = ad::sigmoid(ad::slice(projected, 0, n) + ad::slice(gh, 0, n));
  const ad::Var r = ad::sigmoid(ad::slice(projected, n, n) + ad::slice(gh, n, n));
  const ad::Var c =
      ad::tanh(ad::slice(projected, 2 * n, n) + ad::matmul(bind(*cand_weight), r * h));
  return h + z * (c - h);
}

}  // namespace traffnet::model
