#include "mex/nn/lstm.hpp"

#include <cmath>

namespace mex::nn {

Lstm::Lstm(const std::string& prefix, Eigen::Index input, Eigen::Index hidden)
    : w_(prefix + ".w", 4 * hidden, input),
      u_(prefix + ".u", 4 * hidden, hidden),
      b_(prefix + ".b", 4 * hidden, 1) {}

void Lstm::init(Rng& rng) {
  const auto h = hidden_size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(h));
  uniform_init(w_, rng, scale);
  uniform_init(u_, rng, scale);
  b_.value.setZero();
  b_.value.block(h, 0, h, 1).setOnes();  // forget gate
}

Matrix Lstm::forward(const Matrix& x, Cache* cache) const {
  const auto h = hidden_size();
  return forward(x, Vector::Zero(h), Vector::Zero(h), cache);
}

Matrix Lstm::forward(const Matrix& x, const Vector& h0, const Vector& c0, Cache* cache) const {
  const auto H = hidden_size();
  const auto T = x.cols();
  Matrix pre = w_.value * x;
  pre.colwise() += b_.value.col(0);
  Matrix hs(H, T), cs(H, T), gates(4 * H, T);
  Vector h = h0, c = c0;
  Vector z(4 * H);
  for (Eigen::Index t = 0; t < T; ++t) {
    z.noalias() = pre.col(t) + u_.value * h;
    for (Eigen::Index k = 0; k < H; ++k) {
      const double i = sigmoid(z(k));
      const double f = sigmoid(z(H + k));
      const double g = std::tanh(z(2 * H + k));
      const double o = sigmoid(z(3 * H + k));
      c(k) = f * c(k) + i * g;
      h(k) = o * std::tanh(c(k));
      gates(k, t) = i;
      gates(H + k, t) = f;
      gates(2 * H + k, t) = g;
      gates(3 * H + k, t) = o;
    }
    hs.col(t) = h;
    cs.col(t) = c;
  }
  if (cache) {
    cache->x = x;
    cache->gates = std::move(gates);
    cache->c = cs;
    cache->h = hs;
    cache->h0 = h0;
    cache->c0 = c0;
  }
  return hs;
}

Matrix Lstm::backward(const Cache& cache, const Matrix& dh) {
  const auto H = hidden_size();
  const auto T = cache.x.cols();
  Matrix dz(4 * H, T);
  Vector dh_next = Vector::Zero(H), dc_next = Vector::Zero(H);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const Vector dh_t = dh.col(t) + dh_next;
    for (Eigen::Index k = 0; k < H; ++k) {
      const double i = cache.gates(k, t), f = cache.gates(H + k, t);
      const double g = cache.gates(2 * H + k, t), o = cache.gates(3 * H + k, t);
      const double tc = std::tanh(cache.c(k, t));
      const double c_prev = t > 0 ? cache.c(k, t - 1) : cache.c0(k);
      const double dc = dh_t(k) * o * (1.0 - tc * tc) + dc_next(k);
      dz(k, t) = dc * g * i * (1.0 - i);
      dz(H + k, t) = dc * c_prev * f * (1.0 - f);
      dz(2 * H + k, t) = dc * i * (1.0 - g * g);
      dz(3 * H + k, t) = dh_t(k) * tc * o * (1.0 - o);
      dc_next(k) = dc * f;
    }
    dh_next.noalias() = u_.value.transpose() * dz.col(t);
  }
  Matrix h_prev(H, T);
  if (T > 0) {
    h_prev.col(0) = cache.h0;
    if (T > 1) h_prev.rightCols(T - 1) = cache.h.leftCols(T - 1);
  }
  w_.grad.noalias() += dz * cache.x.transpose();
  u_.grad.noalias() += dz * h_prev.transpose();
  b_.grad.col(0) += dz.rowwise().sum();
  return w_.value.transpose() * dz;
}

}  // namespace mex::nn
