#include "doctest.h"
#include "mex/core/error.hpp"
#include "mex/nn/lstm.hpp"
#include "mex/tagger/crf.hpp"
#include "oracles.hpp"

using namespace mex;
using namespace mex::tagger;

namespace {

struct Instance {
  Matrix emissions, transitions;
};

Instance random_instance(Rng& rng, std::size_t T, std::size_t L, double scale = 2.0) {
  Instance in{Matrix(L, T), Matrix(L + 2, L + 2)};
  for (Eigen::Index i = 0; i < in.emissions.size(); ++i) in.emissions(i) = rng.uniform(-scale, scale);
  for (Eigen::Index i = 0; i < in.transitions.size(); ++i) in.transitions(i) = rng.uniform(-scale, scale);
  return in;
}

}  // namespace

TEST_CASE("viterbi and logZ agree with enumeration") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto T = 1 + rng.below(6), L = 1 + rng.below(5);
    const auto in = random_instance(rng, T, L);
    double best = -1e300;
    std::vector<double> all;
    oracle::for_each_sequence(T, L, [&](const std::vector<std::size_t>& y) {
      const double s = path_score(in.emissions, in.transitions, y);
      best = std::max(best, s);
      all.push_back(s);
    });
    const auto v = viterbi_decode(in.emissions, in.transitions);
    CHECK(std::abs(v.score - best) <= 1e-9);
    CHECK(std::abs(path_score(in.emissions, in.transitions, v.path) - v.score) <= 1e-9);
    const double log_z = log_partition(in.emissions, in.transitions);
    CHECK(std::abs(log_z - oracle::log_sum_exp(all)) <= 1e-6);
    double total = 0;
    for (const double s : all) total += std::exp(s - log_z);
    CHECK(std::abs(total - 1.0) <= 1e-6);

    const Matrix m = crf_marginals(in.emissions, in.transitions);
    for (Eigen::Index t = 0; t < m.cols(); ++t) CHECK(std::abs(m.col(t).sum() - 1.0) <= 1e-6);
  }
}

TEST_CASE("logZ, marginals and gradients stay exact across extreme score ranges") {
  // Label 1 is nearly unreachable at t=1 and label 0 is 900 nats down at
  // t=2, so probability-space tables underflow.
  Matrix e(2, 3), tr = Matrix::Zero(4, 4);
  e << 0, 0, -900,
       -900, 0, 0;
  tr(0, 1) = -10000;
  std::vector<double> all;
  Matrix expect = Matrix::Zero(2, 3);
  oracle::for_each_sequence(3, 2, [&](const std::vector<std::size_t>& y) {
    all.push_back(path_score(e, tr, y));
  });
  const double log_z = oracle::log_sum_exp(all);
  CHECK(std::abs(log_partition(e, tr) - log_z) <= 1e-6);
  std::size_t k = 0;
  oracle::for_each_sequence(3, 2, [&](const std::vector<std::size_t>& y) {
    for (std::size_t t = 0; t < 3; ++t) expect(y[t], t) += std::exp(all[k] - log_z);
    ++k;
  });
  CHECK((crf_marginals(e, tr) - expect).cwiseAbs().maxCoeff() <= 1e-9);

  Matrix de = Matrix::Zero(2, 3), dtr = Matrix::Zero(4, 4);
  crf_nll(e, tr, {1, 1, 1}, &de, &dtr);
  Rng rng(5);
  auto check_rows_balance = [&](Instance in) {
    Matrix a = Matrix::Zero(in.emissions.rows(), in.emissions.cols());
    Matrix b = Matrix::Zero(in.transitions.rows(), in.transitions.cols());
    const std::vector<std::size_t> gold(in.emissions.cols(), 0);
    crf_nll(in.emissions, in.transitions, gold, &a, &b);
    for (Eigen::Index t = 0; t < a.cols(); ++t) CHECK(std::abs(a.col(t).sum()) <= 1e-9);
  };
  check_rows_balance(random_instance(rng, 5, 4, 400.0));
  CHECK(de.allFinite());
  CHECK(dtr.allFinite());
  for (Eigen::Index t = 0; t < 3; ++t) CHECK(std::abs(de.col(t).sum()) <= 1e-9);
}

TEST_CASE("viterbi: T=1, ties and bounds") {
  Rng rng(3);
  const auto in = random_instance(rng, 1, 4);
  const auto v = viterbi_decode(in.emissions, in.transitions);
  std::size_t arg = 0;
  double best = -1e300;
  for (std::size_t j = 0; j < 4; ++j) {
    const double s = in.emissions(j, 0) + in.transitions(4, j) + in.transitions(j, 5);
    if (s > best) {
      best = s;
      arg = j;
    }
  }
  CHECK(v.path == std::vector<std::size_t>{arg});

  const auto flat = viterbi_decode(Matrix::Zero(3, 5), Matrix::Zero(5, 5));
  CHECK(flat.path == std::vector<std::size_t>(5, 0));

  for (int trial = 0; trial < 20; ++trial) {
    const auto r = random_instance(rng, 8, 5);
    const auto best_path = viterbi_decode(r.emissions, r.transitions);
    for (int k = 0; k < 1000; ++k) {
      std::vector<std::size_t> y(8);
      for (auto& l : y) l = rng.below(5);
      CHECK(path_score(r.emissions, r.transitions, y) <= best_path.score + 1e-12);
    }
  }
  CHECK_THROWS_AS(viterbi_decode(Matrix(3, 0), Matrix::Zero(5, 5)), Error);
  Matrix bad = Matrix::Zero(3, 2);
  bad(0, 0) = std::nan("");
  CHECK_THROWS_AS(viterbi_decode(bad, Matrix::Zero(5, 5)), Error);
}

TEST_CASE("crf_nll: single label has zero loss, loss is non-negative") {
  Rng rng(4);
  const auto one = random_instance(rng, 5, 1);
  CHECK(crf_nll(one.emissions, one.transitions, std::vector<std::size_t>(5, 0), nullptr, nullptr) ==
        doctest::Approx(0.0).epsilon(1e-12));
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = random_instance(rng, 1 + rng.below(7), 1 + rng.below(5));
    std::vector<std::size_t> y(in.emissions.cols());
    for (auto& l : y) l = rng.below(in.emissions.rows());
    CHECK(crf_nll(in.emissions, in.transitions, y, nullptr, nullptr) >= -1e-12);
  }
}

TEST_CASE("crf_nll: gradients match finite differences") {
  Rng rng(8);
  double worst = 0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto in = random_instance(rng, 2 + rng.below(5), 2 + rng.below(4));
    std::vector<std::size_t> y(in.emissions.cols());
    for (auto& l : y) l = rng.below(in.emissions.rows());
    Matrix de = Matrix::Zero(in.emissions.rows(), in.emissions.cols());
    Matrix dt = Matrix::Zero(in.transitions.rows(), in.transitions.cols());
    crf_nll(in.emissions, in.transitions, y, &de, &dt);
    auto f = [&] { return crf_nll(in.emissions, in.transitions, y, nullptr, nullptr); };
    for (Eigen::Index i = 0; i < in.emissions.size(); ++i) {
      const double num = oracle::numeric_grad(&in.emissions(i), 1e-4, f);
      worst = std::max(worst, oracle::relative_error(de(i), num));
      ++checked;
    }
    for (Eigen::Index i = 0; i < in.transitions.size(); ++i) {
      const double num = oracle::numeric_grad(&in.transitions(i), 1e-4, f);
      worst = std::max(worst, oracle::relative_error(dt(i), num));
      ++checked;
    }
  }
  CHECK(checked >= 100);
  CHECK(worst <= 1e-3);
}

TEST_CASE("lstm: gradients match finite differences") {
  Rng rng(2);
  nn::Lstm lstm("l", 3, 4);
  lstm.init(rng);
  nn::Matrix x(3, 5), target(4, 5);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform(-1, 1);
  for (Eigen::Index i = 0; i < target.size(); ++i) target(i) = rng.uniform(-1, 1);
  nn::Vector h0 = nn::Vector::Random(4) * 0.3, c0 = nn::Vector::Random(4) * 0.3;
  auto loss = [&] {
    const auto h = lstm.forward(x, h0, c0, nullptr);
    return 0.5 * (h - target).squaredNorm();
  };
  nn::Lstm::Cache cache;
  const auto h = lstm.forward(x, h0, c0, &cache);
  auto params = lstm.params();
  nn::zero_grads(params);
  const nn::Matrix dx = lstm.backward(cache, h - target);
  double worst = 0;
  for (auto* p : params) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      worst = std::max(worst, oracle::relative_error(p->grad(i),
                                                     oracle::numeric_grad(&p->value(i), 1e-5, loss)));
    }
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    worst = std::max(worst, oracle::relative_error(dx(i), oracle::numeric_grad(&x(i), 1e-5, loss)));
  }
  CHECK(worst <= 1e-4);
}
