#pragma once

#include <map>
#include <string>
#include <vector>

#include "mex/corpus/document.hpp"
#include "mex/eval/metrics.hpp"

namespace mex::eval {

enum class IaaTarget { kConcepts, kRelations };

struct PairAgreement {
  std::string annotator_a;
  std::string annotator_b;
  std::size_t shared_docs = 0;
  ClassCounts counts;  // a as reference
  double f1 = 0.0;
};

struct IaaReport {
  std::vector<PairAgreement> pairs;
  double mean_f1 = 0.0;  // unweighted over pairs
  std::vector<std::string> notices;
};

// Character-level agreement. Concepts: every (position, type) a span
// covers. Relations: every (type, i, j) with i a character of Arg1 and j a
// character of Arg2. Pairs without shared documents are left out and
// reported in `notices`.
IaaReport char_level_iaa(const std::map<std::string, std::vector<corpus::AnnotatedDocument>>& versions,
                         IaaTarget target = IaaTarget::kConcepts);

// Counts for one shared document.
ClassCounts char_level_counts(const corpus::AnnotatedDocument& reference,
                              const corpus::AnnotatedDocument& other, IaaTarget target);

}  // namespace mex::eval
