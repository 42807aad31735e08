#include "mex/nn/param.hpp"

#include <cmath>

#include "mex/core/error.hpp"

namespace mex::nn {

void uniform_init(Param& p, Rng& rng, double scale) {
  for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) p.value(i, j) = rng.uniform(-scale, scale);
  }
}

void glorot_init(Param& p, Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  uniform_init(p, rng, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
}

void zero_grads(const ParamRefs& params) {
  for (auto* p : params) p->zero_grad();
}

double grad_norm(const ParamRefs& params) {
  double sq = 0.0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

double clip_grad_norm(const ParamRefs& params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto* p : params) p->grad *= s;
  }
  return norm;
}

bool all_finite(const ParamRefs& params) {
  for (const auto* p : params) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

void write_params(BinaryWriter& w, const ParamRefs& params) {
  w.u64(params.size());
  for (const auto* p : params) {
    w.str(p->name);
    w.matrix(p->value);
  }
}

void read_params(BinaryReader& r, const ParamRefs& params) {
  const auto n = r.u64();
  if (n != params.size()) {
    throw FormatError("parameter count " + std::to_string(n) + " found, expected " +
                      std::to_string(params.size()));
  }
  for (auto* p : params) {
    const auto name = r.str();
    if (name != p->name) throw FormatError("parameter '" + name + "' found, expected '" + p->name + "'");
    Matrix m = r.matrix();
    if (m.rows() != p->value.rows() || m.cols() != p->value.cols()) {
      throw FormatError("parameter '" + name + "' has shape " + std::to_string(m.rows()) + "x" +
                        std::to_string(m.cols()) + ", expected " + std::to_string(p->value.rows()) +
                        "x" + std::to_string(p->value.cols()));
    }
    p->value = std::move(m);
    p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
  }
}

std::vector<Matrix> snapshot(const ParamRefs& params) {
  std::vector<Matrix> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

void restore(const ParamRefs& params, const std::vector<Matrix>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

void Sgd::step(const ParamRefs& params) {
  for (auto* p : params) p->value -= lr_ * p->grad;
}

void Adam::step(const ParamRefs& params) {
  if (m_.empty()) {
    for (const auto* p : params) {
      m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * p->grad;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * p->grad.cwiseProduct(p->grad);
    p->value.array() -=
        lr_ * (m_[k].array() / c1) / ((v_[k].array() / c2).sqrt() + eps_);
  }
}

}  // namespace mex::nn
