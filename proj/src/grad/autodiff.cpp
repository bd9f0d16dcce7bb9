#include "dualview/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dualview::grad {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) os << " x ";
    os << s[i];
  }
  os << "]";
  return os.str();
}

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) n *= static_cast<std::size_t>(d);
  return n;
}

Var make_tensor(Shape shape, std::vector<double> value, bool requires_grad,
                std::string name) {
  for (int d : shape) {
    if (d < 0) throw ShapeError("tensor: negative dimension in " + shape_str(shape));
  }
  if (shape_numel(shape) != value.size()) {
    throw ShapeError("tensor: shape " + shape_str(shape) + " does not match " +
                     std::to_string(value.size()) + " values");
  }
  auto n = std::make_shared<TensorNode>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->name = std::move(name);
  return n;
}

Var zeros(Shape shape, bool requires_grad, std::string name) {
  std::vector<double> v(shape_numel(shape), 0.0);
  return make_tensor(std::move(shape), std::move(v), requires_grad, std::move(name));
}

Var scalar(double v) { return make_tensor({1}, {v}); }

std::vector<double>& ensure_grad(const Var& v) {
  if (v->grad.size() != v->value.size()) v->grad.assign(v->value.size(), 0.0);
  return v->grad;
}

namespace {

void check_finite(const Var& v, const char* op) {
  for (double x : v->value) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string(op) + ": non-finite output entry");
    }
  }
}

void require_rank2(const Var& v, const char* op) {
  if (v->shape.size() != 2) {
    throw ShapeError(std::string(op) + ": expected a matrix, got " + shape_str(v->shape));
  }
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a->shape != b->shape) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a->shape) +
                     " vs " + shape_str(b->shape));
  }
}

bool any_grad(const std::initializer_list<Var>& vs) {
  for (const auto& v : vs)
    if (v->requires_grad) return true;
  return false;
}

}  // namespace

void Tape::backward(const Var& loss) {
  if (loss->numel() != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        shape_str(loss->shape));
  }
  for (auto& v : watched_) ensure_grad(v).assign(v->numel(), 0.0);
  for (auto& r : records_) {
    for (auto& v : r.touched) ensure_grad(v).assign(v->numel(), 0.0);
  }
  ensure_grad(loss);
  loss->grad[0] = 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) it->pull();
  clear();
}

void Tape::clear() {
  records_.clear();
  watched_.clear();
}

// ---- ops ----------------------------------------------------------------

Var matmul(Tape& t, const Var& a, const Var& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const int m = a->shape[0], k = a->shape[1], k2 = b->shape[0], n = b->shape[1];
  if (k != k2) {
    throw ShapeError("matmul: inner dimensions differ: " + shape_str(a->shape) +
                     " vs " + shape_str(b->shape));
  }
  std::vector<double> out(static_cast<std::size_t>(m) * n, 0.0);
  const double* A = a->value.data();
  const double* B = b->value.data();
  for (int i = 0; i < m; ++i) {
    double* out_row = out.data() + static_cast<std::size_t>(i) * n;
    const double* a_row = A + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double aik = a_row[p];
      const double* b_row = B + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) out_row[j] += aik * b_row[j];
    }
  }
  auto c = make_tensor({m, n}, std::move(out));
  check_finite(c, "matmul");
  if (any_grad({a, b})) {
    c->requires_grad = true;
    t.record({a, b, c}, [a, b, c, m, k, n] {
      const double* dC = c->grad.data();
      if (a->requires_grad) {
        double* dA = ensure_grad(a).data();
        const double* B = b->value.data();
        for (int i = 0; i < m; ++i) {
          const double* dc_row = dC + static_cast<std::size_t>(i) * n;
          double* da_row = dA + static_cast<std::size_t>(i) * k;
          for (int p = 0; p < k; ++p) {
            const double* b_row = B + static_cast<std::size_t>(p) * n;
            double acc = 0.0;
            for (int j = 0; j < n; ++j) acc += dc_row[j] * b_row[j];
            da_row[p] += acc;
          }
        }
      }
      if (b->requires_grad) {
        double* dB = ensure_grad(b).data();
        const double* A = a->value.data();
        for (int i = 0; i < m; ++i) {
          const double* dc_row = dC + static_cast<std::size_t>(i) * n;
          const double* a_row = A + static_cast<std::size_t>(i) * k;
          for (int p = 0; p < k; ++p) {
            const double aik = a_row[p];
            double* db_row = dB + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) db_row[j] += aik * dc_row[j];
          }
        }
      }
    });
  }
  return c;
}

Var transpose(Tape& t, const Var& a) {
  require_rank2(a, "transpose");
  const int r = a->shape[0], c = a->shape[1];
  std::vector<double> out(a->numel());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<std::size_t>(j) * r + i] = a->value[static_cast<std::size_t>(i) * c + j];
  auto o = make_tensor({c, r}, std::move(out));
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, r, c] {
      double* dA = ensure_grad(a).data();
      const double* dO = o->grad.data();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
          dA[static_cast<std::size_t>(i) * c + j] += dO[static_cast<std::size_t>(j) * r + i];
    });
  }
  return o;
}

Var add(Tape& t, const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] + b->value[i];
  auto o = make_tensor(a->shape, std::move(out));
  check_finite(o, "add");
  if (any_grad({a, b})) {
    o->requires_grad = true;
    t.record({a, b, o}, [a, b, o] {
      const auto& dO = o->grad;
      if (a->requires_grad) {
        auto& dA = ensure_grad(a);
        for (std::size_t i = 0; i < dO.size(); ++i) dA[i] += dO[i];
      }
      if (b->requires_grad) {
        auto& dB = ensure_grad(b);
        for (std::size_t i = 0; i < dO.size(); ++i) dB[i] += dO[i];
      }
    });
  }
  return o;
}

Var sub(Tape& t, const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] - b->value[i];
  auto o = make_tensor(a->shape, std::move(out));
  check_finite(o, "sub");
  if (any_grad({a, b})) {
    o->requires_grad = true;
    t.record({a, b, o}, [a, b, o] {
      const auto& dO = o->grad;
      if (a->requires_grad) {
        auto& dA = ensure_grad(a);
        for (std::size_t i = 0; i < dO.size(); ++i) dA[i] += dO[i];
      }
      if (b->requires_grad) {
        auto& dB = ensure_grad(b);
        for (std::size_t i = 0; i < dO.size(); ++i) dB[i] -= dO[i];
      }
    });
  }
  return o;
}

Var mul(Tape& t, const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * b->value[i];
  auto o = make_tensor(a->shape, std::move(out));
  check_finite(o, "mul");
  if (any_grad({a, b})) {
    o->requires_grad = true;
    t.record({a, b, o}, [a, b, o] {
      const auto& dO = o->grad;
      if (a->requires_grad) {
        auto& dA = ensure_grad(a);
        for (std::size_t i = 0; i < dO.size(); ++i) dA[i] += dO[i] * b->value[i];
      }
      if (b->requires_grad) {
        auto& dB = ensure_grad(b);
        for (std::size_t i = 0; i < dO.size(); ++i) dB[i] += dO[i] * a->value[i];
      }
    });
  }
  return o;
}

Var add_rowvec(Tape& t, const Var& a, const Var& bias) {
  require_rank2(a, "add_rowvec");
  const int r = a->shape[0], c = a->shape[1];
  if (bias->shape.size() != 1 || bias->shape[0] != c) {
    throw ShapeError("add_rowvec: bias " + shape_str(bias->shape) +
                     " does not match matrix " + shape_str(a->shape));
  }
  std::vector<double> out(a->numel());
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      out[static_cast<std::size_t>(i) * c + j] =
          a->value[static_cast<std::size_t>(i) * c + j] + bias->value[j];
  auto o = make_tensor(a->shape, std::move(out));
  check_finite(o, "add_rowvec");
  if (any_grad({a, bias})) {
    o->requires_grad = true;
    t.record({a, bias, o}, [a, bias, o, r, c] {
      const double* dO = o->grad.data();
      if (a->requires_grad) {
        auto& dA = ensure_grad(a);
        for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += dO[i];
      }
      if (bias->requires_grad) {
        auto& dB = ensure_grad(bias);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j) dB[j] += dO[static_cast<std::size_t>(i) * c + j];
      }
    });
  }
  return o;
}

Var scale(Tape& t, const Var& a, double k) {
  std::vector<double> out(a->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a->value[i] * k;
  auto o = make_tensor(a->shape, std::move(out));
  check_finite(o, "scale");
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, k] {
      auto& dA = ensure_grad(a);
      for (std::size_t i = 0; i < dA.size(); ++i) dA[i] += k * o->grad[i];
    });
  }
  return o;
}

namespace {

template <class F, class DF>
Var pointwise(Tape& t, const Var& a, const char* op, F f, DF df) {
  std::vector<double> out(a->numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a->value[i]);
  auto o = make_tensor(a->shape, std::move(out));
  check_finite(o, op);
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, df] {
      auto& dA = ensure_grad(a);
      for (std::size_t i = 0; i < dA.size(); ++i)
        dA[i] += df(a->value[i], o->value[i]) * o->grad[i];
    });
  }
  return o;
}

}  // namespace

Var ramp(Tape& t, const Var& a) {
  return pointwise(
      t, a, "ramp", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(Tape& t, const Var& a) {
  return pointwise(
      t, a, "sigmoid",
      [](double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh_op(Tape& t, const Var& a) {
  return pointwise(
      t, a, "tanh", [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var mean_rows(Tape& t, const Var& a) {
  require_rank2(a, "mean_rows");
  const int r = a->shape[0], c = a->shape[1];
  if (r == 0) throw ShapeError("mean_rows: empty input (0 rows)");
  std::vector<double> out(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out[j] += a->value[static_cast<std::size_t>(i) * c + j];
  const double inv = 1.0 / r;
  for (double& x : out) x *= inv;
  auto o = make_tensor({c}, std::move(out));
  check_finite(o, "mean_rows");
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, r, c, inv] {
      auto& dA = ensure_grad(a);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) dA[static_cast<std::size_t>(i) * c + j] += inv * o->grad[j];
    });
  }
  return o;
}

Var mean_groups(Tape& t, const Var& a, int group) {
  require_rank2(a, "mean_groups");
  const int r = a->shape[0], c = a->shape[1];
  if (group < 1 || r % group != 0) {
    throw ShapeError("mean_groups: rows " + std::to_string(r) +
                     " not divisible by group " + std::to_string(group));
  }
  const int g = r / group;
  std::vector<double> out(static_cast<std::size_t>(g) * c, 0.0);
  for (int i = 0; i < r; ++i) {
    double* dst = out.data() + static_cast<std::size_t>(i / group) * c;
    const double* src = a->value.data() + static_cast<std::size_t>(i) * c;
    for (int j = 0; j < c; ++j) dst[j] += src[j];
  }
  const double inv = 1.0 / group;
  for (double& x : out) x *= inv;
  auto o = make_tensor({g, c}, std::move(out));
  check_finite(o, "mean_groups");
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, r, c, group, inv] {
      auto& dA = ensure_grad(a);
      const double* dO = o->grad.data();
      for (int i = 0; i < r; ++i) {
        const double* src = dO + static_cast<std::size_t>(i / group) * c;
        double* dst = dA.data() + static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) dst[j] += inv * src[j];
      }
    });
  }
  return o;
}

Var mean_groups_weighted(Tape& t, const Var& a, int group,
                         const std::vector<double>& row_weights) {
  require_rank2(a, "mean_groups_weighted");
  const int r = a->shape[0], c = a->shape[1];
  if (group < 1 || r % group != 0) {
    throw ShapeError("mean_groups_weighted: rows " + std::to_string(r) +
                     " not divisible by group " + std::to_string(group));
  }
  if (static_cast<int>(row_weights.size()) != r) {
    throw ShapeError("mean_groups_weighted: need one weight per row");
  }
  const int g = r / group;
  // all-zero groups fall back to a plain mean
  std::vector<double> norm(static_cast<std::size_t>(r));
  for (int gi = 0; gi < g; ++gi) {
    double sum = 0.0;
    for (int k = 0; k < group; ++k) sum += row_weights[static_cast<std::size_t>(gi) * group + k];
    for (int k = 0; k < group; ++k) {
      const std::size_t row = static_cast<std::size_t>(gi) * group + k;
      norm[row] = sum > 0.0 ? row_weights[row] / sum : 1.0 / group;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(g) * c, 0.0);
  for (int i = 0; i < r; ++i) {
    double* dst = out.data() + static_cast<std::size_t>(i / group) * c;
    const double* src = a->value.data() + static_cast<std::size_t>(i) * c;
    const double w = norm[static_cast<std::size_t>(i)];
    for (int j = 0; j < c; ++j) dst[j] += w * src[j];
  }
  auto o = make_tensor({g, c}, std::move(out));
  check_finite(o, "mean_groups_weighted");
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, r, c, group, norm] {
      auto& dA = ensure_grad(a);
      const double* dO = o->grad.data();
      for (int i = 0; i < r; ++i) {
        const double* src = dO + static_cast<std::size_t>(i / group) * c;
        double* dst = dA.data() + static_cast<std::size_t>(i) * c;
        const double w = norm[static_cast<std::size_t>(i)];
        for (int j = 0; j < c; ++j) dst[j] += w * src[j];
      }
    });
  }
  return o;
}

Var l2_normalize_rows(Tape& t, const Var& a) {
  require_rank2(a, "l2_normalize_rows");
  const int r = a->shape[0], c = a->shape[1];
  std::vector<double> out(a->numel());
  std::vector<double> norms(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    const double* src = a->value.data() + static_cast<std::size_t>(i) * c;
    double sq = 0.0;
    for (int j = 0; j < c; ++j) sq += src[j] * src[j];
    const double norm = std::sqrt(sq);
    if (norm <= 1e-12) {
      throw DegenerateVectorError("l2_normalize_rows: row " + std::to_string(i) +
                                  " has norm " + std::to_string(norm));
    }
    norms[static_cast<std::size_t>(i)] = norm;
    double* dst = out.data() + static_cast<std::size_t>(i) * c;
    for (int j = 0; j < c; ++j) dst[j] = src[j] / norm;
  }
  auto o = make_tensor(a->shape, std::move(out));
  check_finite(o, "l2_normalize_rows");
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, r, c, norms] {
      auto& dA = ensure_grad(a);
      for (int i = 0; i < r; ++i) {
        const double* y = o->value.data() + static_cast<std::size_t>(i) * c;
        const double* dy = o->grad.data() + static_cast<std::size_t>(i) * c;
        double* dx = dA.data() + static_cast<std::size_t>(i) * c;
        double dot = 0.0;
        for (int j = 0; j < c; ++j) dot += dy[j] * y[j];
        const double inv = 1.0 / norms[static_cast<std::size_t>(i)];
        for (int j = 0; j < c; ++j) dx[j] += (dy[j] - y[j] * dot) * inv;
      }
    });
  }
  return o;
}

Var logsumexp_rows(Tape& t, const Var& a) {
  require_rank2(a, "logsumexp_rows");
  const int r = a->shape[0], c = a->shape[1];
  if (c < 1) throw ShapeError("logsumexp_rows: need at least one column");
  std::vector<double> out(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i) {
    const double* src = a->value.data() + static_cast<std::size_t>(i) * c;
    double m = src[0];
    for (int j = 1; j < c; ++j) m = std::max(m, src[j]);
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += std::exp(src[j] - m);
    out[static_cast<std::size_t>(i)] = m + std::log(s);
  }
  auto o = make_tensor({r}, std::move(out));
  check_finite(o, "logsumexp_rows");
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, r, c] {
      auto& dA = ensure_grad(a);
      for (int i = 0; i < r; ++i) {
        const double* src = a->value.data() + static_cast<std::size_t>(i) * c;
        double* dst = dA.data() + static_cast<std::size_t>(i) * c;
        const double lse = o->value[static_cast<std::size_t>(i)];
        const double g = o->grad[static_cast<std::size_t>(i)];
        for (int j = 0; j < c; ++j) dst[j] += g * std::exp(src[j] - lse);
      }
    });
  }
  return o;
}

Var diagonal(Tape& t, const Var& a) {
  require_rank2(a, "diagonal");
  const int n = a->shape[0];
  if (a->shape[1] != n) throw ShapeError("diagonal: matrix not square: " + shape_str(a->shape));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = a->value[static_cast<std::size_t>(i) * n + i];
  auto o = make_tensor({n}, std::move(out));
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, n] {
      auto& dA = ensure_grad(a);
      for (int i = 0; i < n; ++i) dA[static_cast<std::size_t>(i) * n + i] += o->grad[static_cast<std::size_t>(i)];
    });
  }
  return o;
}

Var group_diagonal(Tape& t, const Var& a, int group) {
  require_rank2(a, "group_diagonal");
  const int b = a->shape[0];
  if (group < 1 || a->shape[1] != b * group) {
    throw ShapeError("group_diagonal: expected " + std::to_string(b) + " x " +
                     std::to_string(b) + "*" + std::to_string(group) + ", got " +
                     shape_str(a->shape));
  }
  const int cols = a->shape[1];
  std::vector<double> out(static_cast<std::size_t>(b) * group);
  for (int i = 0; i < b; ++i)
    for (int m = 0; m < group; ++m)
      out[static_cast<std::size_t>(i) * group + m] =
          a->value[static_cast<std::size_t>(i) * cols + i * group + m];
  auto o = make_tensor({b, group}, std::move(out));
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, b, group, cols] {
      auto& dA = ensure_grad(a);
      for (int i = 0; i < b; ++i)
        for (int m = 0; m < group; ++m)
          dA[static_cast<std::size_t>(i) * cols + i * group + m] +=
              o->grad[static_cast<std::size_t>(i) * group + m];
    });
  }
  return o;
}

Var rows_from_table(Tape& t, const Var& table, const std::vector<int>& ids) {
  require_rank2(table, "rows_from_table");
  const int v = table->shape[0], e = table->shape[1];
  for (int id : ids) {
    if (id < 0 || id >= v) {
      throw ContractError("rows_from_table: id " + std::to_string(id) +
                          " out of range [0, " + std::to_string(v) + ")");
    }
  }
  const int n = static_cast<int>(ids.size());
  std::vector<double> out(static_cast<std::size_t>(n) * e);
  for (int i = 0; i < n; ++i) {
    const double* src = table->value.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]) * e;
    std::copy(src, src + e, out.data() + static_cast<std::size_t>(i) * e);
  }
  auto o = make_tensor({n, e}, std::move(out));
  if (table->requires_grad) {
    o->requires_grad = true;
    t.record({table, o}, [table, o, ids, e, n] {
      auto& dT = ensure_grad(table);
      for (int i = 0; i < n; ++i) {
        double* dst = dT.data() + static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]) * e;
        const double* src = o->grad.data() + static_cast<std::size_t>(i) * e;
        for (int j = 0; j < e; ++j) dst[j] += src[j];
      }
    });
  }
  return o;
}

Var take_per_row(Tape& t, const Var& a, const std::vector<int>& cols) {
  require_rank2(a, "take_per_row");
  const int r = a->shape[0], c = a->shape[1];
  if (static_cast<int>(cols.size()) != r) {
    throw ShapeError("take_per_row: need one column index per row");
  }
  for (int j : cols) {
    if (j < 0 || j >= c) {
      throw ContractError("take_per_row: column " + std::to_string(j) + " out of range");
    }
  }
  std::vector<double> out(static_cast<std::size_t>(r));
  for (int i = 0; i < r; ++i)
    out[static_cast<std::size_t>(i)] = a->value[static_cast<std::size_t>(i) * c + cols[static_cast<std::size_t>(i)]];
  auto o = make_tensor({r}, std::move(out));
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, cols, r, c] {
      auto& dA = ensure_grad(a);
      for (int i = 0; i < r; ++i)
        dA[static_cast<std::size_t>(i) * c + cols[static_cast<std::size_t>(i)]] += o->grad[static_cast<std::size_t>(i)];
    });
  }
  return o;
}

Var concat_cols(Tape& t, const Var& a, const Var& b) {
  require_rank2(a, "concat_cols");
  require_rank2(b, "concat_cols");
  if (a->shape[0] != b->shape[0]) {
    throw ShapeError("concat_cols: row counts differ: " + shape_str(a->shape) + " vs " +
                     shape_str(b->shape));
  }
  const int r = a->shape[0], ca = a->shape[1], cb = b->shape[1];
  std::vector<double> out(static_cast<std::size_t>(r) * (ca + cb));
  for (int i = 0; i < r; ++i) {
    std::copy(a->value.begin() + static_cast<std::size_t>(i) * ca,
              a->value.begin() + static_cast<std::size_t>(i + 1) * ca,
              out.begin() + static_cast<std::size_t>(i) * (ca + cb));
    std::copy(b->value.begin() + static_cast<std::size_t>(i) * cb,
              b->value.begin() + static_cast<std::size_t>(i + 1) * cb,
              out.begin() + static_cast<std::size_t>(i) * (ca + cb) + ca);
  }
  auto o = make_tensor({r, ca + cb}, std::move(out));
  if (any_grad({a, b})) {
    o->requires_grad = true;
    t.record({a, b, o}, [a, b, o, r, ca, cb] {
      const double* dO = o->grad.data();
      if (a->requires_grad) {
        auto& dA = ensure_grad(a);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < ca; ++j)
            dA[static_cast<std::size_t>(i) * ca + j] += dO[static_cast<std::size_t>(i) * (ca + cb) + j];
      }
      if (b->requires_grad) {
        auto& dB = ensure_grad(b);
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < cb; ++j)
            dB[static_cast<std::size_t>(i) * cb + j] += dO[static_cast<std::size_t>(i) * (ca + cb) + ca + j];
      }
    });
  }
  return o;
}

Var mean_all(Tape& t, const Var& a) {
  if (a->numel() == 0) throw ShapeError("mean_all: empty input");
  double s = 0.0;
  for (double x : a->value) s += x;
  const double inv = 1.0 / static_cast<double>(a->numel());
  auto o = make_tensor({1}, {s * inv});
  check_finite(o, "mean_all");
  if (a->requires_grad) {
    o->requires_grad = true;
    t.record({a, o}, [a, o, inv] {
      auto& dA = ensure_grad(a);
      for (double& g : dA) g += inv * o->grad[0];
    });
  }
  return o;
}

Var cosine_matrix(Tape& t, const Var& u, const Var& v) {
  require_rank2(u, "cosine_matrix");
  require_rank2(v, "cosine_matrix");
  if (u->shape[1] != v->shape[1]) {
    throw ShapeError("cosine_matrix: feature dims differ: " + shape_str(u->shape) +
                     " vs " + shape_str(v->shape));
  }
  return matmul(t, l2_normalize_rows(t, u), transpose(t, l2_normalize_rows(t, v)));
}

}  // namespace dualview::grad
