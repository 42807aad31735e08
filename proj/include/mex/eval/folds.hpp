#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mex::eval {

struct Fold {
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

struct FoldPlan {
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.75, 0.10, 0.15};
  std::vector<Fold> folds;
};

// Fold i shuffles the sorted ids with a generator seeded by
// derive_seed(seed, i) and cuts at the rounded train and dev sizes.
FoldPlan make_folds(std::vector<std::string> doc_ids, std::size_t k = 5,
                    std::array<double, 3> ratios = {0.75, 0.10, 0.15}, std::uint64_t seed = 0);

}  // namespace mex::eval
