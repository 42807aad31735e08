#pragma once

#include <cmath>

#include "mex/nn/param.hpp"

namespace mex::nn {

// Single-layer LSTM over column sequences (input D x T, output H x T).
// Gate rows are stacked as input, forget, cell, output.
class Lstm {
 public:
  struct Cache {
    Matrix x;      // D x T
    Matrix gates;  // 4H x T, after the nonlinearities
    Matrix c;      // H x T
    Matrix h;      // H x T
    Vector h0, c0;
  };

  Lstm() = default;
  Lstm(const std::string& prefix, Eigen::Index input, Eigen::Index hidden);

  void init(Rng& rng);

  Eigen::Index input_size() const { return w_.value.cols(); }
  Eigen::Index hidden_size() const { return u_.value.cols(); }

  // Runs from state (h0, c0). With `cache` set, keeps what backward needs.
  Matrix forward(const Matrix& x, const Vector& h0, const Vector& c0, Cache* cache) const;
  Matrix forward(const Matrix& x, Cache* cache) const;

  // dh: gradient w.r.t. every output column. Accumulates parameter
  // gradients and returns the gradient w.r.t. x. The initial state is
  // treated as a constant.
  Matrix backward(const Cache& cache, const Matrix& dh);

  ParamRefs params() { return {&w_, &u_, &b_}; }

 private:
  Param w_, u_, b_;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace mex::nn
