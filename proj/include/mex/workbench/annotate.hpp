#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mex/corpus/document.hpp"
#include "mex/workbench/bundle.hpp"

namespace mex::workbench {

// Offsets are code points into `text`, end-exclusive.
struct TokenResult {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  std::string pos;
  bool operator==(const TokenResult&) const = default;
};

struct SentenceResult {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<TokenResult> tokens;
  bool operator==(const SentenceResult&) const = default;
};

struct ConceptResult {
  std::string id;  // T1, T2, ... in text order
  std::string type;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string text;
  double confidence = 0.0;
  bool operator==(const ConceptResult&) const = default;
};

struct RelationResult {
  std::string id;  // R1, R2, ...
  std::string type;
  std::string arg1;  // concept id
  std::string arg2;
  double confidence = 0.0;
  bool operator==(const RelationResult&) const = default;
};

struct AnnotationResult {
  std::string text;
  std::vector<SentenceResult> sentences;
  std::vector<ConceptResult> concepts;
  std::vector<RelationResult> relations;
  bool operator==(const AnnotationResult&) const = default;

  // Keys in a fixed order:
  //   text, sentences[{start, end, tokens[{start, end, text, pos}]}],
  //   concepts[{id, type, start, end, text, confidence}],
  //   relations[{id, type, arg1, arg2, confidence}]
  nlohmann::ordered_json to_json() const;
  // Rejects offsets outside the text and relations whose arguments are not
  // listed concepts.
  static AnnotationResult from_json(const nlohmann::json& j);

  // The document the result describes, with tokens, POS, spans and
  // relations; for standoff and CoNLL export.
  corpus::AnnotatedDocument to_document(const std::string& doc_id = "input") const;
};

// Compact JSON plus a newline; the body the service returns.
std::string result_json(const AnnotationResult& r);

struct AnnotateOptions {
  double relation_threshold = 0.5;
  relation::CandidatePolicy candidates;
};

// tokenize -> POS -> concepts -> relations among the predicted concepts.
// Depends only on the bundle and the text; pooled memories start from each
// model's stored snapshot on every call.
AnnotationResult annotate(const ModelBundle& bundle, std::string_view text, const AnnotateOptions& options = {});

}  // namespace mex::workbench
