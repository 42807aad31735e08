#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mex/core/random.hpp"
#include "mex/corpus/bioes.hpp"
#include "mex/corpus/document.hpp"
#include "mex/corpus/schema.hpp"

namespace mex::relation {

// Token range [begin, end) of one argument.
struct Argument {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string type;
  bool operator==(const Argument&) const = default;
};

struct RelationCandidate {
  std::string doc_id;
  std::size_t sentence = 0;
  std::vector<std::string> tokens;
  std::vector<std::string> token_types;  // concept type covering each token, "" if none
  Argument arg1, arg2;
  bool overlapping = false;  // the arguments share tokens
  std::string label;         // relation name or NO_RELATION
  bool operator==(const RelationCandidate&) const = default;
};

struct CandidatePolicy {
  std::size_t max_distance = 50;  // between argument heads, in tokens
  double negative_ratio = 1.0;    // fraction of NO_RELATION candidates kept
  bool signature_filter = true;
  std::uint64_t seed = 1;  // for down-sampling

  void validate() const;
};

// Gold relation between two spans of the same sentence, by span index.
struct SpanLink {
  std::size_t arg1 = 0;
  std::size_t arg2 = 0;
  std::string relation;
};

// Ordered pairs of distinct spans within the distance cap. With the
// signature filter, pairs no relation type accepts are skipped. `rng` is
// only drawn from when negatives are down-sampled.
std::vector<RelationCandidate> generate_candidates(const std::vector<std::string>& tokens,
                                                   const std::vector<corpus::TokenSpan>& spans,
                                                   const std::vector<SpanLink>& gold,
                                                   const CandidatePolicy& policy,
                                                   const corpus::Schema& schema, Rng* rng = nullptr);

// Candidates of every sentence of a tokenized document. Relations whose
// arguments are in different sentences are not represented.
std::vector<RelationCandidate> document_candidates(const corpus::AnnotatedDocument& doc,
                                                   const CandidatePolicy& policy,
                                                   const corpus::Schema& schema, Rng* rng = nullptr);

std::vector<RelationCandidate> corpus_candidates(const std::vector<corpus::AnnotatedDocument>& docs,
                                                 const CandidatePolicy& policy,
                                                 const corpus::Schema& schema);

nlohmann::ordered_json candidate_to_json(const RelationCandidate& c);
RelationCandidate candidate_from_json(const nlohmann::json& j);

// One JSON record per line.
std::string candidates_to_jsonl(const std::vector<RelationCandidate>& cs);
std::vector<RelationCandidate> candidates_from_jsonl(std::string_view text);

}  // namespace mex::relation
