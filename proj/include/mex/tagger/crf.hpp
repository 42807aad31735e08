#pragma once

#include <cstddef>
#include <vector>

#include "mex/nn/param.hpp"

namespace mex::tagger {

using nn::Matrix;

// Linear-chain CRF over L labels. Emissions are L x T (one column per
// token). Transitions are (L+2) x (L+2), entry (i, j) scoring i -> j, with
// row L the virtual start state and column L+1 the virtual stop state.
inline std::size_t crf_start(const Matrix& transitions) { return transitions.rows() - 2; }
inline std::size_t crf_stop(const Matrix& transitions) { return transitions.rows() - 1; }

struct ViterbiResult {
  std::vector<std::size_t> path;
  double score = 0.0;
};

// Ties go to the lower label index.
ViterbiResult viterbi_decode(const Matrix& emissions, const Matrix& transitions);

double path_score(const Matrix& emissions, const Matrix& transitions,
                  const std::vector<std::size_t>& path);

double log_partition(const Matrix& emissions, const Matrix& transitions);

// logZ - score(gold). Gradients are added to d_emissions / d_transitions
// (either may be null), scaled by `weight`.
double crf_nll(const Matrix& emissions, const Matrix& transitions,
               const std::vector<std::size_t>& gold, Matrix* d_emissions,
               Matrix* d_transitions, double weight = 1.0);

// Per-token label marginals, L x T; each column sums to 1.
Matrix crf_marginals(const Matrix& emissions, const Matrix& transitions);

}  // namespace mex::tagger
