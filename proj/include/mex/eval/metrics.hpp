#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mex/corpus/document.hpp"

namespace mex::eval {

// A typed half-open range. Offsets may be characters or tokens, as long as
// gold and prediction agree.
struct LabeledSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string type;

  bool operator==(const LabeledSpan&) const = default;
  auto operator<=>(const LabeledSpan&) const = default;
};

enum class MatchMode { kStrict, kLenient };

// kMaximum seeds with the greedy order and then augments to a maximum
// one-to-one matching. kGreedy stops after the greedy pass.
enum class LenientAlgorithm { kMaximum, kGreedy };

struct MatchOptions {
  MatchMode mode = MatchMode::kStrict;
  bool require_same_type = true;  // lenient only
  LenientAlgorithm algorithm = LenientAlgorithm::kMaximum;
};

const char* mode_name(MatchMode m);
MatchMode parse_mode(const std::string& name);

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t support() const { return tp + fn; }
  ClassCounts& operator+=(const ClassCounts& o);
  bool operator==(const ClassCounts&) const = default;
};

struct MatchCounts {
  std::map<std::string, ClassCounts> per_class;

  ClassCounts micro() const;
  MatchCounts& operator+=(const MatchCounts& o);
  bool operator==(const MatchCounts&) const = default;
};

MatchCounts match_spans(const std::vector<LabeledSpan>& gold,
                        const std::vector<LabeledSpan>& pred, const MatchOptions& options);
MatchCounts match_spans(const std::vector<LabeledSpan>& gold,
                        const std::vector<LabeledSpan>& pred, MatchMode mode);

// Concept spans of a document as character envelopes.
std::vector<LabeledSpan> concept_spans(const corpus::AnnotatedDocument& doc);

// Matches documents by doc_id. Gold documents without a prediction count
// every gold span as FN.
MatchCounts match_documents(const std::vector<corpus::AnnotatedDocument>& gold,
                            const std::vector<corpus::AnnotatedDocument>& pred,
                            const MatchOptions& options);

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

Scores scores(const ClassCounts& c);

struct ClassRow {
  std::string name;
  ClassCounts counts;
  Scores scores;
  std::size_t support = 0;
};

struct EvalReport {
  std::vector<ClassRow> classes;
  ClassCounts micro_counts;
  Scores micro;
  Scores macro;  // over classes with support > 0
};

// `classes` adds rows (possibly empty) so a report always lists them.
EvalReport prf_scores(const MatchCounts& counts, const std::vector<std::string>& classes = {});

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(const std::vector<double>& values);

struct CrossValidationReport {
  std::vector<EvalReport> folds;
  MeanStd micro_f1;
  MeanStd macro_f1;
  std::map<std::string, MeanStd> class_f1;
};

CrossValidationReport summarize_folds(const std::vector<MatchCounts>& per_fold,
                                      const std::vector<std::string>& classes = {});

double token_accuracy(const std::vector<std::string>& gold, const std::vector<std::string>& pred);

// A relation between two argument ranges (character envelopes).
struct RelationTriple {
  std::string doc_id;
  corpus::Fragment arg1;
  corpus::Fragment arg2;
  std::string type;
  bool operator==(const RelationTriple&) const = default;
  auto operator<=>(const RelationTriple&) const = default;
};

inline constexpr const char* kNoRelation = "NO_RELATION";

std::vector<RelationTriple> relation_triples(const corpus::AnnotatedDocument& doc);

// Predictions labelled kNoRelation are ignored, so the no-relation class
// never reaches the aggregates. A gold relation without a matching
// prediction is a FN for its type.
MatchCounts evaluate_relations(const std::vector<RelationTriple>& gold,
                               const std::vector<RelationTriple>& pred);

}  // namespace mex::eval
