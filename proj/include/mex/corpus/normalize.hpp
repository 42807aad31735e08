#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mex/corpus/document.hpp"

namespace mex::corpus {

enum class NestedResolution { kLongestSpan };
enum class MultiLabelResolution { kCorpusFrequency };  // ties: lexicographic type
enum class DiscontinuousPolicy { kEnvelope, kDrop };

struct NormalizationPolicy {
  bool drop_cross_sentence = true;
  NestedResolution nested_resolution = NestedResolution::kLongestSpan;
  MultiLabelResolution multi_label_resolution = MultiLabelResolution::kCorpusFrequency;
  DiscontinuousPolicy collapse_discontinuous = DiscontinuousPolicy::kEnvelope;

  // "drop_cross_sentence=1 nested=longest-span ..." stamped on derived data.
  std::string describe() const;
};

// Span counts per rule.
struct NormalizationReport {
  std::size_t collapsed_discontinuous = 0;
  std::size_t dropped_discontinuous = 0;
  std::size_t cross_sentence = 0;
  std::size_t no_token = 0;
  std::size_t nested = 0;
  std::size_t multi_label = 0;
  std::size_t relations_dropped = 0;
  std::size_t attributes_dropped = 0;

  std::size_t spans_dropped() const {
    return dropped_discontinuous + cross_sentence + no_token + nested + multi_label;
  }
  bool all_zero() const {
    return collapsed_discontinuous == 0 && spans_dropped() == 0 &&
           relations_dropped == 0 && attributes_dropped == 0;
  }
  NormalizationReport& operator+=(const NormalizationReport& o);
  std::string to_string() const;
};

using ConceptFrequency = std::map<std::string, std::size_t>;

// Concept-type counts over tokenized documents, taken after discontinuous
// spans are collapsed and cross-sentence spans removed.
ConceptFrequency concept_frequencies(const std::vector<AnnotatedDocument>& docs);

struct NormalizeResult {
  AnnotatedDocument doc;
  NormalizationReport report;
};

// Requires doc.sentences (see Tokenizer). Afterwards every span is
// contiguous, lies inside one sentence, covers at least one token, no span
// strictly contains another and no token is covered by two spans.
// Idempotent.
NormalizeResult normalize_document(const AnnotatedDocument& doc,
                                   const NormalizationPolicy& policy,
                                   const ConceptFrequency& freq);

struct MergeDecision {
  std::string doc_id;
  std::string chosen;
  std::vector<std::string> candidates;
};

struct MergeResult {
  std::vector<AnnotatedDocument> docs;  // one per doc_id, sorted by doc_id
  std::vector<MergeDecision> log;
};

// Keeps, per doc_id, the version of the annotator with the most documents
// overall; ties go to the lexicographically smallest annotator id.
// Throws mex::Error when versions of one doc_id differ in text.
MergeResult merge_annotators(const std::vector<AnnotatedDocument>& versions,
                             const std::map<std::string, std::size_t>& annotator_doc_counts);

// Counts documents per annotator from the versions themselves.
MergeResult merge_annotators(const std::vector<AnnotatedDocument>& versions);

}  // namespace mex::corpus
