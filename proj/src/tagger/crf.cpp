#include "mex/tagger/crf.hpp"

#include <cmath>
#include <limits>

#include "mex/core/error.hpp"

namespace mex::tagger {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(const Matrix& emissions, const Matrix& transitions) {
  if (emissions.cols() == 0) throw Error("CRF input has no tokens");
  if (transitions.rows() != transitions.cols() || transitions.rows() != emissions.rows() + 2) {
    throw Error("CRF transition matrix does not match the label count");
  }
  if (!emissions.allFinite() || !transitions.allFinite()) {
    throw Error("CRF received non-finite scores");
  }
}

double lse(const double* v, Eigen::Index n) {
  double m = kNegInf;
  for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, v[i]);
  if (m == kNegInf) return m;
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

// alpha(:, t) includes the emission at t.
Matrix forward_table(const Matrix& e, const Matrix& tr) {
  const auto L = e.rows(), T = e.cols();
  const auto S = static_cast<Eigen::Index>(crf_start(tr));
  Matrix alpha(L, T);
  for (Eigen::Index j = 0; j < L; ++j) alpha(j, 0) = tr(S, j) + e(j, 0);
  std::vector<double> buf(L);
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      for (Eigen::Index i = 0; i < L; ++i) buf[i] = alpha(i, t - 1) + tr(i, j);
      alpha(j, t) = lse(buf.data(), L) + e(j, t);
    }
  }
  return alpha;
}

// beta(:, t) excludes the emission at t.
Matrix backward_table(const Matrix& e, const Matrix& tr) {
  const auto L = e.rows(), T = e.cols();
  const auto E = static_cast<Eigen::Index>(crf_stop(tr));
  Matrix beta(L, T);
  for (Eigen::Index i = 0; i < L; ++i) beta(i, T - 1) = tr(i, E);
  std::vector<double> buf(L);
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    for (Eigen::Index i = 0; i < L; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) buf[j] = tr(i, j) + e(j, t + 1) + beta(j, t + 1);
      beta(i, t) = lse(buf.data(), L);
    }
  }
  return beta;
}

double log_z_from(const Matrix& alpha, const Matrix& tr) {
  const auto L = alpha.rows(), T = alpha.cols();
  const auto E = static_cast<Eigen::Index>(crf_stop(tr));
  std::vector<double> buf(L);
  for (Eigen::Index j = 0; j < L; ++j) buf[j] = alpha(j, T - 1) + tr(j, E);
  return lse(buf.data(), L);
}

// Forward-backward in rescaled probability space: a and b are alpha and
// beta with every column normalized, so marginals and pairwise terms come
// out of matrix products. `ok` is false when a column underflows, in which
// case callers use the log-space tables instead.
// Eigen's vectorized exp clamps large negative arguments to about DBL_MIN
// instead of 0, which leaks mass into forbidden transitions.
Matrix exp_of(const Matrix& m) {
  return m.unaryExpr([](double v) { return std::exp(v); });
}

// Column sums below this lose precision to subnormals.
constexpr double kTiny = 1e-250;

struct Scaled {
  bool ok = false;
  Matrix a, b;  // L x T
  Matrix em;    // exp(e - colmax(e))
  Matrix p;     // exp(tr - max(tr)) over real labels
  Eigen::VectorXd start, stop;
  double log_z = 0.0;
};

Scaled scaled_tables(const Matrix& e, const Matrix& tr) {
  const auto L = e.rows(), T = e.cols();
  const auto S = static_cast<Eigen::Index>(crf_start(tr));
  const auto E = static_cast<Eigen::Index>(crf_stop(tr));
  Scaled s;
  const auto core = tr.topLeftCorner(L, L);
  const double m_tr = core.maxCoeff();
  s.p = exp_of(core.array() - m_tr);
  const double m_start = tr.row(S).head(L).maxCoeff();
  const double m_stop = tr.col(E).head(L).maxCoeff();
  s.start = exp_of(tr.row(S).head(L).transpose().array() - m_start);
  s.stop = exp_of(tr.col(E).head(L).array() - m_stop);
  s.em.resize(L, T);
  s.a.resize(L, T);
  s.b.resize(L, T);
  double log_scale = m_start;
  for (Eigen::Index t = 0; t < T; ++t) {
    const double m = e.col(t).maxCoeff();
    s.em.col(t) = exp_of(e.col(t).array() - m);
    if (t == 0) {
      s.a.col(0) = s.start.cwiseProduct(s.em.col(0));
    } else {
      s.a.col(t).noalias() = s.p.transpose() * s.a.col(t - 1);
      s.a.col(t) = s.a.col(t).cwiseProduct(s.em.col(t));
      log_scale += m_tr;
    }
    const double c = s.a.col(t).sum();
    if (!(c > kTiny) || !std::isfinite(c)) return s;
    s.a.col(t) /= c;
    log_scale += m + std::log(c);
  }
  const double z = s.stop.dot(s.a.col(T - 1));
  if (!(z > kTiny) || !std::isfinite(z)) return s;
  s.log_z = log_scale + m_stop + std::log(z);

  s.b.col(T - 1) = s.stop / s.stop.sum();
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    s.b.col(t).noalias() = s.p * s.em.col(t + 1).cwiseProduct(s.b.col(t + 1));
    const double d = s.b.col(t).sum();
    if (!(d > kTiny) || !std::isfinite(d)) return s;
    s.b.col(t) /= d;
  }
  s.ok = true;
  return s;
}

Matrix scaled_marginals(const Scaled& s) {
  Matrix mu = s.a.cwiseProduct(s.b);
  for (Eigen::Index t = 0; t < mu.cols(); ++t) mu.col(t) /= mu.col(t).sum();
  return mu;
}

}  // namespace

ViterbiResult viterbi_decode(const Matrix& e, const Matrix& tr) {
  check_inputs(e, tr);
  const auto L = e.rows(), T = e.cols();
  const auto S = static_cast<Eigen::Index>(crf_start(tr));
  const auto E = static_cast<Eigen::Index>(crf_stop(tr));
  Matrix delta(L, T);
  Eigen::MatrixXi back(L, T);
  for (Eigen::Index j = 0; j < L; ++j) delta(j, 0) = tr(S, j) + e(j, 0);
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (Eigen::Index i = 0; i < L; ++i) {
        const double v = delta(i, t - 1) + tr(i, j);
        if (v > best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      delta(j, t) = best + e(j, t);
      back(j, t) = arg;
    }
  }
  double best = kNegInf;
  Eigen::Index last = 0;
  for (Eigen::Index j = 0; j < L; ++j) {
    const double v = delta(j, T - 1) + tr(j, E);
    if (v > best) {
      best = v;
      last = j;
    }
  }
  ViterbiResult out;
  out.score = best;
  out.path.assign(T, 0);
  out.path[T - 1] = static_cast<std::size_t>(last);
  for (Eigen::Index t = T - 1; t > 0; --t) {
    out.path[t - 1] = static_cast<std::size_t>(back(out.path[t], t));
  }
  return out;
}

double path_score(const Matrix& e, const Matrix& tr, const std::vector<std::size_t>& path) {
  if (path.size() != static_cast<std::size_t>(e.cols())) throw Error("path length mismatch");
  const auto S = crf_start(tr), E = crf_stop(tr);
  double s = tr(S, path[0]);
  for (std::size_t t = 0; t < path.size(); ++t) {
    s += e(path[t], t);
    if (t > 0) s += tr(path[t - 1], path[t]);
  }
  return s + tr(path.back(), E);
}

double log_partition(const Matrix& e, const Matrix& tr) {
  check_inputs(e, tr);
  const Scaled s = scaled_tables(e, tr);
  if (s.ok) return s.log_z;
  return log_z_from(forward_table(e, tr), tr);
}

double crf_nll(const Matrix& e, const Matrix& tr, const std::vector<std::size_t>& gold,
               Matrix* d_e, Matrix* d_tr, double weight) {
  check_inputs(e, tr);
  const auto L = e.rows(), T = e.cols();
  for (const auto y : gold) {
    if (y >= static_cast<std::size_t>(L)) throw Error("gold label index out of range");
  }
  const auto S = static_cast<Eigen::Index>(crf_start(tr));
  const auto E = static_cast<Eigen::Index>(crf_stop(tr));
  const Scaled sc = scaled_tables(e, tr);
  if (sc.ok) {
    const double loss = sc.log_z - path_score(e, tr, gold);
    if (!std::isfinite(loss)) throw Error("CRF loss is not finite");
    if (!d_e && !d_tr) return loss;
    const Matrix mu = scaled_marginals(sc);
    if (d_e) {
      *d_e += weight * mu;
      for (Eigen::Index t = 0; t < T; ++t) (*d_e)(gold[t], t) -= weight;
    }
    if (d_tr) {
      if (T > 1) {
        // xi_t(i, j) = a(i, t-1) p(i, j) w(j, t) with w = em * b / K_t
        Matrix w = sc.em.rightCols(T - 1).cwiseProduct(sc.b.rightCols(T - 1));
        for (Eigen::Index t = 1; t < T; ++t) {
          const double k = sc.a.col(t - 1).dot(sc.p * w.col(t - 1));
          w.col(t - 1) /= k;
        }
        const Matrix outer = sc.a.leftCols(T - 1) * w.transpose();
        d_tr->topLeftCorner(L, L) += weight * sc.p.cwiseProduct(outer);
      }
      d_tr->row(S).head(L) += weight * mu.col(0).transpose();
      d_tr->col(E).head(L) += weight * mu.col(T - 1);
      (*d_tr)(S, gold[0]) -= weight;
      (*d_tr)(gold[T - 1], E) -= weight;
      for (Eigen::Index t = 1; t < T; ++t) (*d_tr)(gold[t - 1], gold[t]) -= weight;
    }
    return loss;
  }

  const Matrix alpha = forward_table(e, tr);
  const double log_z = log_z_from(alpha, tr);
  const double loss = log_z - path_score(e, tr, gold);
  if (!std::isfinite(loss)) throw Error("CRF loss is not finite");
  if (!d_e && !d_tr) return loss;

  const Matrix beta = backward_table(e, tr);
  if (d_e) {
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index j = 0; j < L; ++j) {
        (*d_e)(j, t) += weight * std::exp(alpha(j, t) + beta(j, t) - log_z);
      }
      (*d_e)(gold[t], t) -= weight;
    }
  }
  if (d_tr) {
    for (Eigen::Index j = 0; j < L; ++j) {
      (*d_tr)(S, j) += weight * std::exp(alpha(j, 0) + beta(j, 0) - log_z);
      (*d_tr)(j, E) += weight * std::exp(alpha(j, T - 1) + beta(j, T - 1) - log_z);
    }
    for (Eigen::Index t = 1; t < T; ++t) {
      for (Eigen::Index i = 0; i < L; ++i) {
        for (Eigen::Index j = 0; j < L; ++j) {
          (*d_tr)(i, j) +=
              weight * std::exp(alpha(i, t - 1) + tr(i, j) + e(j, t) + beta(j, t) - log_z);
        }
      }
    }
    (*d_tr)(S, gold[0]) -= weight;
    (*d_tr)(gold[T - 1], E) -= weight;
    for (Eigen::Index t = 1; t < T; ++t) (*d_tr)(gold[t - 1], gold[t]) -= weight;
  }
  return loss;
}

Matrix crf_marginals(const Matrix& e, const Matrix& tr) {
  check_inputs(e, tr);
  const Scaled s = scaled_tables(e, tr);
  if (s.ok) return scaled_marginals(s);
  const Matrix alpha = forward_table(e, tr);
  const Matrix beta = backward_table(e, tr);
  const double log_z = log_z_from(alpha, tr);
  return (alpha + beta).array().unaryExpr([&](double v) { return std::exp(v - log_z); });
}

}  // namespace mex::tagger
