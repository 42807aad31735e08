#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mex/core/binary_io.hpp"
#include "mex/core/random.hpp"

namespace mex::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;

  Param() = default;
  Param(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

using ParamRefs = std::vector<Param*>;

void uniform_init(Param& p, Rng& rng, double scale);
// Glorot uniform over (fan_in, fan_out).
void glorot_init(Param& p, Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out);

void zero_grads(const ParamRefs& params);
double grad_norm(const ParamRefs& params);
// Rescales gradients so the global L2 norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(const ParamRefs& params, double max_norm);
bool all_finite(const ParamRefs& params);

// Values are written by position with their names and shapes, and read
// back with a shape check.
void write_params(BinaryWriter& w, const ParamRefs& params);
void read_params(BinaryReader& r, const ParamRefs& params);

// Snapshot of parameter values, for best-checkpoint selection.
std::vector<Matrix> snapshot(const ParamRefs& params);
void restore(const ParamRefs& params, const std::vector<Matrix>& values);

class Sgd {
 public:
  explicit Sgd(double lr) : lr_(lr) {}
  void step(const ParamRefs& params);
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_;
};

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}
  void step(const ParamRefs& params);
  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace mex::nn
