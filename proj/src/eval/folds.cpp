#include "mex/eval/folds.hpp"

#include <algorithm>
#include <cmath>

#include "mex/core/error.hpp"
#include "mex/core/random.hpp"

namespace mex::eval {

FoldPlan make_folds(std::vector<std::string> doc_ids, std::size_t k,
                    std::array<double, 3> ratios, std::uint64_t seed) {
  if (k == 0) throw Error("fold count must be positive");
  for (const double r : ratios) {
    if (!(r >= 0.0)) throw Error("split ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw Error("split ratios must sum to 1");
  }
  std::sort(doc_ids.begin(), doc_ids.end());
  if (std::adjacent_find(doc_ids.begin(), doc_ids.end()) != doc_ids.end()) {
    throw Error("duplicate document id in fold input");
  }
  if (doc_ids.size() < 10) {
    throw Error("need at least 10 documents to split, got " + std::to_string(doc_ids.size()));
  }

  const auto n = doc_ids.size();
  const auto n_train = static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n)));
  const auto n_dev = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n))));

  FoldPlan plan;
  plan.seed = seed;
  plan.ratios = ratios;
  for (std::size_t i = 0; i < k; ++i) {
    auto ids = doc_ids;
    Rng rng(derive_seed(seed, i));
    rng.shuffle(ids);
    Fold fold;
    fold.train.assign(ids.begin(), ids.begin() + n_train);
    fold.dev.assign(ids.begin() + n_train, ids.begin() + n_train + n_dev);
    fold.test.assign(ids.begin() + n_train + n_dev, ids.end());
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace mex::eval
