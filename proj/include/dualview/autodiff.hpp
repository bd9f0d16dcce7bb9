#pragma once

// Reverse-mode autodiff over dense row-major double tensors.
//
// Every op computes its value eagerly, verifies the output is finite, and
// (when an input requires gradients) records a pull-back closure on the
// tape. Tape::backward seeds the scalar loss with 1, replays the records in
// exact reverse order, and leaves a gradient on every watched or touched
// tensor. The tape is cleared afterwards and can be reused.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dualview/errors.hpp"

namespace dualview::grad {

using Shape = std::vector<int>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

struct TensorNode {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // sized during backward
  bool requires_grad = false;
  std::string name;

  int rows() const { return shape.empty() ? 0 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  std::size_t numel() const { return value.size(); }
};

using Var = std::shared_ptr<TensorNode>;

Var make_tensor(Shape shape, std::vector<double> value, bool requires_grad = false,
                std::string name = "");
Var zeros(Shape shape, bool requires_grad = false, std::string name = "");
Var scalar(double v);

class Tape {
 public:
  // Leaves registered here receive a (possibly zero) gradient on backward
  // even if no op touched them.
  void watch(Var v) { watched_.push_back(std::move(v)); }

  void record(std::vector<Var> touched, std::function<void()> pull) {
    records_.push_back({std::move(touched), std::move(pull)});
  }

  void backward(const Var& loss);
  void clear();
  std::size_t size() const { return records_.size(); }

 private:
  struct Record {
    std::vector<Var> touched;
    std::function<void()> pull;
  };
  std::vector<Record> records_;
  std::vector<Var> watched_;
};

// Accumulation helper shared by op pull-backs; public for test oracles.
std::vector<double>& ensure_grad(const Var& v);

// ---- primitive ops ------------------------------------------------------

Var matmul(Tape& t, const Var& a, const Var& b);
Var transpose(Tape& t, const Var& a);
Var add(Tape& t, const Var& a, const Var& b);
Var sub(Tape& t, const Var& a, const Var& b);
Var mul(Tape& t, const Var& a, const Var& b);
Var add_rowvec(Tape& t, const Var& a, const Var& bias);
Var scale(Tape& t, const Var& a, double k);
Var ramp(Tape& t, const Var& a);  // max(0, x); subgradient 0 at the kink
Var sigmoid(Tape& t, const Var& a);
Var tanh_op(Tape& t, const Var& a);

Var mean_rows(Tape& t, const Var& a);                 // [r x c] -> [c]
Var mean_groups(Tape& t, const Var& a, int group);    // [(g*k) x c] -> [g x c]
Var mean_groups_weighted(Tape& t, const Var& a, int group,
                         const std::vector<double>& row_weights);
Var l2_normalize_rows(Tape& t, const Var& a);
Var logsumexp_rows(Tape& t, const Var& a);            // [r x c] -> [r]
Var diagonal(Tape& t, const Var& a);                  // [n x n] -> [n]
Var group_diagonal(Tape& t, const Var& a, int group); // [b x b*m] -> [b x m]
Var rows_from_table(Tape& t, const Var& table, const std::vector<int>& ids);
Var take_per_row(Tape& t, const Var& a, const std::vector<int>& cols);
Var concat_cols(Tape& t, const Var& a, const Var& b);
Var mean_all(Tape& t, const Var& a);                  // -> [1]

// cosine of every row pair: l2-normalized u times l2-normalized v transposed
Var cosine_matrix(Tape& t, const Var& u, const Var& v);

}  // namespace dualview::grad
