#pragma once

// Reference implementations used only by tests. They enumerate instead of
// being clever, so they share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mex/core/random.hpp"
#include "mex/eval/metrics.hpp"

namespace oracle {

struct Counts {
  std::map<std::string, std::size_t> tp, fp, fn;
};

// Best one-to-one pairing under `eligible`, by exhaustive search over every
// assignment of gold items to an unused prediction or to nothing.
inline Counts brute_force_match(const std::vector<mex::eval::LabeledSpan>& gold,
                                const std::vector<mex::eval::LabeledSpan>& pred, bool lenient) {
  auto eligible = [&](std::size_t g, std::size_t p) {
    if (gold[g].type != pred[p].type) return false;
    if (!lenient) return gold[g].start == pred[p].start && gold[g].end == pred[p].end;
    return std::min(gold[g].end, pred[p].end) > std::max(gold[g].start, pred[p].start);
  };
  std::vector<int> best_assign, assign(gold.size(), -1);
  std::vector<bool> used(pred.size(), false);
  int best = -1;
  std::function<void(std::size_t, int)> rec = [&](std::size_t g, int matched) {
    if (g == gold.size()) {
      if (matched > best) {
        best = matched;
        best_assign = assign;
      }
      return;
    }
    assign[g] = -1;
    rec(g + 1, matched);
    for (std::size_t p = 0; p < pred.size(); ++p) {
      if (used[p] || !eligible(g, p)) continue;
      used[p] = true;
      assign[g] = static_cast<int>(p);
      rec(g + 1, matched + 1);
      used[p] = false;
      assign[g] = -1;
    }
  };
  rec(0, 0);
  Counts c;
  std::vector<bool> pred_used(pred.size(), false);
  for (std::size_t g = 0; g < gold.size(); ++g) {
    if (best_assign[g] >= 0) {
      ++c.tp[gold[g].type];
      pred_used[best_assign[g]] = true;
    } else {
      ++c.fn[gold[g].type];
    }
  }
  for (std::size_t p = 0; p < pred.size(); ++p) {
    if (!pred_used[p]) ++c.fp[pred[p].type];
  }
  return c;
}

inline bool same_counts(const Counts& o, const mex::eval::MatchCounts& m) {
  auto get = [](const std::map<std::string, std::size_t>& mp, const std::string& k) {
    const auto it = mp.find(k);
    return it == mp.end() ? std::size_t{0} : it->second;
  };
  std::set<std::string> names;
  for (const auto* mp : {&o.tp, &o.fp, &o.fn}) {
    for (const auto& [k, v] : *mp) names.insert(k);
  }
  for (const auto& [k, v] : m.per_class) names.insert(k);
  for (const auto& k : names) {
    const auto it = m.per_class.find(k);
    const mex::eval::ClassCounts mc = it == m.per_class.end() ? mex::eval::ClassCounts{} : it->second;
    if (mc.tp != get(o.tp, k) || mc.fp != get(o.fp, k) || mc.fn != get(o.fn, k)) return false;
  }
  return true;
}

inline std::vector<mex::eval::LabeledSpan> random_spans(mex::Rng& rng, std::size_t max_n,
                                                        std::size_t doc_len,
                                                        const std::vector<std::string>& types) {
  std::vector<mex::eval::LabeledSpan> out;
  const auto n = rng.below(max_n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = rng.below(doc_len - 1);
    const auto b = a + 1 + rng.below(std::min<std::size_t>(8, doc_len - a));
    out.push_back({a, std::min(b, doc_len), rng.pick(types)});
  }
  return out;
}

// Per-character F1 by walking every (position, type) cell.
inline double char_f1(std::size_t doc_len, const std::vector<mex::eval::LabeledSpan>& a,
                      const std::vector<mex::eval::LabeledSpan>& b) {
  std::set<std::string> types;
  for (const auto& s : a) types.insert(s.type);
  for (const auto& s : b) types.insert(s.type);
  auto covers = [](const std::vector<mex::eval::LabeledSpan>& v, std::size_t i,
                   const std::string& t) {
    for (const auto& s : v) {
      if (s.type == t && s.start <= i && i < s.end) return true;
    }
    return false;
  };
  double tp = 0, fp = 0, fn = 0;
  for (const auto& t : types) {
    for (std::size_t i = 0; i < doc_len; ++i) {
      const bool in_a = covers(a, i, t), in_b = covers(b, i, t);
      tp += in_a && in_b;
      fn += in_a && !in_b;
      fp += !in_a && in_b;
    }
  }
  const double p = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// Enumerates all L^T label sequences.
inline void for_each_sequence(std::size_t T, std::size_t L,
                              const std::function<void(const std::vector<std::size_t>&)>& f) {
  std::vector<std::size_t> y(T, 0);
  while (true) {
    f(y);
    std::size_t i = 0;
    while (i < T && ++y[i] == L) y[i++] = 0;
    if (i == T) break;
  }
}

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (const double x : v) m = std::max(m, x);
  double s = 0;
  for (const double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Central finite difference of f with respect to *x.
inline double numeric_grad(double* x, double eps, const std::function<double()>& f) {
  const double saved = *x;
  *x = saved + eps;
  const double up = f();
  *x = saved - eps;
  const double down = f();
  *x = saved;
  return (up - down) / (2 * eps);
}

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

}  // namespace oracle
