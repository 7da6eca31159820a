#include "traffnet/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "traffnet/autodiff/derivatives.hpp"
#include "traffnet/common/error.hpp"

namespace traffnet::ad {

namespace detail {
namespace {
UnaryDerivative g_tanh_derivative = &tanh_derivative_reference;
}  // namespace

double tanh_derivative_reference(double /*x*/, double y) { return 1.0 - y * y; }
UnaryDerivative tanh_derivative() { return g_tanh_derivative; }
void set_tanh_derivative(UnaryDerivative fn) {
  g_tanh_derivative = fn != nullptr ? fn : &tanh_derivative_reference;
}
}  // namespace detail

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) {
    throw ContractError(std::string(op) + ": operands live on different tapes");
  }
}

void require_same_shape(Var a, Var b, const char* op) {
  require_same_tape(a, b, op);
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) +
                         " vs " + to_string(b.shape()));
  }
}

void require_vector(Var v, const char* op) {
  if (v.value().rank() != 1) {
    throw DimensionError(std::string(op) + ": expected a vector, got " + to_string(v.shape()));
  }
}

template <typename Forward, typename Derivative>
Var unary(Var v, const char* op, Forward f, Derivative d) {
  const Tensor& x = v.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  const std::size_t xi = v.id();
  const Var parents[] = {v};
  return v.tape().record(
      std::move(out), parents,
      [xi, d](Tape& tape, std::size_t self, std::span<const double> g) {
        if (!tape.needs_grad(xi)) return;
        const Tensor& x = tape.value(xi);
        const Tensor& y = tape.value(self);
        std::vector<double>& gx = tape.grad_buffer(xi);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * d(x[i], y[i]);
      },
      op);
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || (bv.rank() != 1 && bv.rank() != 2) || av.shape()[1] != bv.shape()[0]) {
    throw DimensionError("matmul: shape mismatch " + to_string(av.shape()) + " vs " +
                         to_string(bv.shape()));
  }
  const std::size_t m = av.shape()[0];
  const std::size_t k = av.shape()[1];
  const std::size_t n = bv.rank() == 1 ? 1 : bv.shape()[1];
  Tensor out(bv.rank() == 1 ? Shape{m} : Shape{m, n});
  {
    const double* A = av.values().data();
    const double* B = bv.values().data();
    double* O = out.values().data();
    if (n == 1) {
      for (std::size_t i = 0; i < m; ++i) {
        const double* row = A + i * k;
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += row[p] * B[p];
        O[i] = acc;
      }
    } else {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          const double* brow = B + p * n;
          double* orow = O + i * n;
          for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
        }
      }
    }
  }
  const std::size_t ai = a.id();
  const std::size_t bi = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(
      std::move(out), parents,
      [ai, bi, m, k, n](Tape& tape, std::size_t, std::span<const double> g) {
        const double* A = tape.value(ai).values().data();
        const double* B = tape.value(bi).values().data();
        const double* G = g.data();
        if (tape.needs_grad(ai)) {
          double* ga = tape.grad_buffer(ai).data();
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = G + i * n;
            double* garow = ga + i * k;
            if (n == 1) {
              const double gi = grow[0];
              if (gi == 0.0) continue;
              for (std::size_t p = 0; p < k; ++p) garow[p] += gi * B[p];
              continue;
            }
            for (std::size_t p = 0; p < k; ++p) {
              const double* brow = B + p * n;
              double acc = 0.0;
              for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
              garow[p] += acc;
            }
          }
        }
        if (tape.needs_grad(bi)) {
          double* gb = tape.grad_buffer(bi).data();
          if (n == 1) {
            for (std::size_t i = 0; i < m; ++i) {
              const double gi = G[i];
              if (gi == 0.0) continue;
              const double* arow = A + i * k;
              for (std::size_t p = 0; p < k; ++p) gb[p] += arow[p] * gi;
            }
            return;
          }
          for (std::size_t i = 0; i < m; ++i) {
            const double* grow = G + i * n;
            const double* arow = A + i * k;
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = arow[p];
              double* gbrow = gb + p * n;
              for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
            }
          }
        }
      },
      "matmul");
}

Var affine(Var w, Var x, Var b) {
  require_same_tape(w, x, "affine");
  require_same_tape(w, b, "affine");
  const Tensor& wv = w.value();
  const Tensor& xv = x.value();
  const Tensor& bv = b.value();
  if (wv.rank() != 2 || xv.rank() != 1 || bv.rank() != 1 || wv.shape()[1] != xv.size() ||
      wv.shape()[0] != bv.size()) {
    throw DimensionError("affine: shape mismatch " + to_string(wv.shape()) + " · " +
                         to_string(xv.shape()) + " + " + to_string(bv.shape()));
  }
  const std::size_t m = wv.shape()[0];
  const std::size_t k = wv.shape()[1];
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = wv.values().data() + i * k;
    const double* xp = xv.values().data();
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += row[p] * xp[p];
    out[i] = acc + bv[i];
  }
  const std::size_t wi = w.id();
  const std::size_t xi = x.id();
  const std::size_t bi = b.id();
  const Var parents[] = {w, x, b};
  return w.tape().record(
      std::move(out), parents,
      [wi, xi, bi, m, k](Tape& tape, std::size_t, std::span<const double> g) {
        const Tensor& wv = tape.value(wi);
        const Tensor& xv = tape.value(xi);
        if (tape.needs_grad(wi)) {
          std::vector<double>& gw = tape.grad_buffer(wi);
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            double* row = &gw[i * k];
            const double* xp = xv.values().data();
            for (std::size_t p = 0; p < k; ++p) row[p] += gi * xp[p];
          }
        }
        if (tape.needs_grad(xi)) {
          double* gx = tape.grad_buffer(xi).data();
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            const double* row = wv.values().data() + i * k;
            for (std::size_t p = 0; p < k; ++p) gx[p] += gi * row[p];
          }
        }
        tape.accumulate(bi, g);
      },
      "affine");
}

Var add(Var a, Var b) {
  require_same_shape(a, b, "add");
  Tensor out = a.value();
  out.set_requires_grad(false);
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const std::size_t ai = a.id();
  const std::size_t bi = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(
      std::move(out), parents,
      [ai, bi](Tape& tape, std::size_t, std::span<const double> g) {
        tape.accumulate(ai, g);
        tape.accumulate(bi, g);
      },
      "add");
}

Var sub(Var a, Var b) {
  require_same_shape(a, b, "sub");
  Tensor out = a.value();
  out.set_requires_grad(false);
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const std::size_t ai = a.id();
  const std::size_t bi = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(
      std::move(out), parents,
      [ai, bi](Tape& tape, std::size_t, std::span<const double> g) {
        tape.accumulate(ai, g);
        if (!tape.needs_grad(bi)) return;
        std::vector<double>& gb = tape.grad_buffer(bi);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
      },
      "sub");
}

Var mul(Var a, Var b) {
  require_same_shape(a, b, "mul");
  Tensor out = a.value();
  out.set_requires_grad(false);
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const std::size_t ai = a.id();
  const std::size_t bi = b.id();
  const Var parents[] = {a, b};
  return a.tape().record(
      std::move(out), parents,
      [ai, bi](Tape& tape, std::size_t, std::span<const double> g) {
        const Tensor& av = tape.value(ai);
        const Tensor& bv = tape.value(bi);
        if (tape.needs_grad(ai)) {
          std::vector<double>& ga = tape.grad_buffer(ai);
          for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (tape.needs_grad(bi)) {
          std::vector<double>& gb = tape.grad_buffer(bi);
          for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * av[i];
        }
      },
      "mul");
}

Var scale(Var v, Var s) {
  require_same_tape(v, s, "scale");
  if (s.size() != 1) {
    throw DimensionError("scale: factor must be a scalar, got " + to_string(s.shape()) +
                         " for operand " + to_string(v.shape()));
  }
  const double c = s.value()[0];
  Tensor out = v.value();
  out.set_requires_grad(false);
  for (double& x : out.values()) x *= c;
  const std::size_t vi = v.id();
  const std::size_t si = s.id();
  const Var parents[] = {v, s};
  return v.tape().record(
      std::move(out), parents,
      [vi, si](Tape& tape, std::size_t, std::span<const double> g) {
        const Tensor& vv = tape.value(vi);
        const double c = tape.value(si)[0];
        if (tape.needs_grad(vi)) {
          std::vector<double>& gv = tape.grad_buffer(vi);
          for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += c * g[i];
        }
        if (tape.needs_grad(si)) {
          double acc = 0.0;
          for (std::size_t i = 0; i < vv.size(); ++i) acc += g[i] * vv[i];
          tape.grad_buffer(si)[0] += acc;
        }
      },
      "scale");
}

Var scale(Var v, double c) {
  Tensor out = v.value();
  out.set_requires_grad(false);
  for (double& x : out.values()) x *= c;
  const std::size_t vi = v.id();
  const Var parents[] = {v};
  return v.tape().record(
      std::move(out), parents,
      [vi, c](Tape& tape, std::size_t, std::span<const double> g) {
        if (!tape.needs_grad(vi)) return;
        std::vector<double>& gv = tape.grad_buffer(vi);
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += c * g[i];
      },
      "scale");
}

Var concat(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat: no operands");
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_same_tape(parts[0], p, "concat");
    require_vector(p, "concat");
    total += p.size();
  }
  std::vector<double> values;
  values.reserve(total);
  std::vector<std::size_t> ids;
  ids.reserve(parts.size());
  for (const Var& p : parts) {
    const auto v = p.value().values();
    values.insert(values.end(), v.begin(), v.end());
    ids.push_back(p.id());
  }
  return parts[0].tape().record(
      Tensor::vector(std::move(values)), parts,
      [ids = std::move(ids)](Tape& tape, std::size_t, std::span<const double> g) {
        std::size_t offset = 0;
        for (const std::size_t id : ids) {
          const std::size_t n = tape.value(id).size();
          tape.accumulate(id, g.subspan(offset, n));
          offset += n;
        }
      },
      "concat");
}

Var concat(std::initializer_list<Var> parts) {
  return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice(Var v, std::size_t offset, std::size_t length) {
  require_vector(v, "slice");
  if (offset + length > v.size()) {
    throw DimensionError("slice: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + length) + ") outside " + to_string(v.shape()));
  }
  const auto src = v.value().values();
  std::vector<double> values(src.begin() + static_cast<std::ptrdiff_t>(offset),
                             src.begin() + static_cast<std::ptrdiff_t>(offset + length));
  const std::size_t vi = v.id();
  const Var parents[] = {v};
  return v.tape().record(
      Tensor::vector(std::move(values)), parents,
      [vi, offset](Tape& tape, std::size_t, std::span<const double> g) {
        if (!tape.needs_grad(vi)) return;
        std::vector<double>& gv = tape.grad_buffer(vi);
        for (std::size_t i = 0; i < g.size(); ++i) gv[offset + i] += g[i];
      },
      "slice");
}

Var subvector(Var v, std::size_t k, std::size_t n) {
  if (k == 0) throw ContractError("subvector: positions are 1-based");
  return slice(v, (k - 1) * n, n);
}

Var sigmoid(Var v) {
  return unary(
      v, "sigmoid",
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var v) {
  return unary(
      v, "tanh", [](double x) { return std::tanh(x); },
      [](double x, double y) { return detail::tanh_derivative()(x, y); });
}

Var relu(Var v) {
  return unary(
      v, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var v, double slope) {
  return unary(
      v, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var softmax(Var v) {
  require_vector(v, "softmax");
  const Tensor& x = v.value();
  if (x.size() == 0) throw ContractError("softmax: empty index set");
  const double peak = *std::max_element(x.values().begin(), x.values().end());
  Tensor out(x.shape());
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::exp(x[i] - peak);
    total += out[i];
  }
  for (double& y : out.values()) y /= total;
  const std::size_t vi = v.id();
  const Var parents[] = {v};
  return v.tape().record(
      std::move(out), parents,
      [vi](Tape& tape, std::size_t self, std::span<const double> g) {
        if (!tape.needs_grad(vi)) return;
        const Tensor& y = tape.value(self);
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
        std::vector<double>& gv = tape.grad_buffer(vi);
        for (std::size_t i = 0; i < y.size(); ++i) gv[i] += y[i] * (g[i] - dot);
      },
      "softmax");
}

Var softmax(std::span<const Var> scalars) { return softmax(concat(scalars)); }

Var sum(Var v) {
  double total = 0.0;
  for (const double x : v.value().values()) total += x;
  const std::size_t vi = v.id();
  const Var parents[] = {v};
  return v.tape().record(
      Tensor::scalar(total), parents,
      [vi](Tape& tape, std::size_t, std::span<const double> g) {
        if (!tape.needs_grad(vi)) return;
        std::vector<double>& gv = tape.grad_buffer(vi);
        for (double& x : gv) x += g[0];
      },
      "sum");
}

Var mse(Var prediction, Var target) {
  require_same_shape(prediction, target, "mse");
  const Tensor& p = prediction.value();
  const Tensor& t = target.value();
  if (p.size() == 0) throw ContractError("mse: empty operands");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - t[i];
    total += d * d;
  }
  const double count = static_cast<double>(p.size());
  const std::size_t pi = prediction.id();
  const std::size_t ti = target.id();
  const Var parents[] = {prediction, target};
  return prediction.tape().record(
      Tensor::scalar(total / count), parents,
      [pi, ti, count](Tape& tape, std::size_t, std::span<const double> g) {
        const Tensor& p = tape.value(pi);
        const Tensor& t = tape.value(ti);
        const double c = 2.0 * g[0] / count;
        if (tape.needs_grad(pi)) {
          std::vector<double>& gp = tape.grad_buffer(pi);
          for (std::size_t i = 0; i < p.size(); ++i) gp[i] += c * (p[i] - t[i]);
        }
        if (tape.needs_grad(ti)) {
          std::vector<double>& gt = tape.grad_buffer(ti);
          for (std::size_t i = 0; i < p.size(); ++i) gt[i] -= c * (p[i] - t[i]);
        }
      },
      "mse");
}

}  // namespace traffnet::ad
