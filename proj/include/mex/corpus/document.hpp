#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mex::corpus {

// Half-open range of code-point offsets.
struct Fragment {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool operator==(const Fragment&) const = default;
  auto operator<=>(const Fragment&) const = default;
};

struct SpanAnnotation {
  std::string id;
  std::string type;
  std::vector<Fragment> fragments;  // sorted, non-overlapping, non-empty
  std::string surface;              // UTF-8; fragments joined by one space

  std::size_t start() const { return fragments.front().start; }
  std::size_t end() const { return fragments.back().end; }
  Fragment envelope() const { return {start(), end()}; }
  bool discontinuous() const { return fragments.size() > 1; }
  bool operator==(const SpanAnnotation&) const = default;
};

struct RelationAnnotation {
  std::string id;
  std::string relation;
  std::string arg1;  // span id
  std::string arg2;  // span id
  std::string trailing;  // text after the Arg2 field, kept for round-trip
  bool operator==(const RelationAnnotation&) const = default;
};

struct AttributeAssignment {
  std::string id;
  std::string family;
  std::string target;  // span id
  std::string value;
  bool operator==(const AttributeAssignment&) const = default;
};

enum class DocType { kClinicalNote, kDischargeSummary };

std::string_view doc_type_name(DocType t);
std::optional<DocType> parse_doc_type(std::string_view name);

struct Token {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string pos;  // empty when untagged
  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<Token> tokens;
  bool operator==(const Sentence&) const = default;
};

// Line position of each record in the .ann file, for byte-stable export.
struct RecordRef {
  enum class Kind { kSpan, kRelation, kAttribute, kVerbatim };
  Kind kind;
  std::string key;  // annotation id, or verbatim line index
  bool operator==(const RecordRef&) const = default;
};

class AnnotatedDocument {
 public:
  std::string doc_id;
  DocType doc_type = DocType::kClinicalNote;
  std::string annotator_id;
  std::u32string text;

  std::vector<SpanAnnotation> spans;
  std::vector<RelationAnnotation> relations;
  std::vector<AttributeAssignment> attributes;
  std::vector<std::string> verbatim;  // comments and unknown record types
  std::vector<RecordRef> order;
  bool final_newline = true;

  std::vector<Sentence> sentences;  // filled by tokenize

  // Set by normalization; describes the policy applied.
  std::optional<std::string> provenance;

  std::string text_utf8() const;
  std::string substring_utf8(std::size_t start, std::size_t end) const;

  const SpanAnnotation* find_span(std::string_view id) const;

  // Appends an annotation and records it in the export order.
  void add_span(SpanAnnotation s);
  void add_relation(RelationAnnotation r);
  void add_attribute(AttributeAssignment a);

  // Drops order entries whose annotation no longer exists.
  void prune_order();

  // Surface derived from fragments over the document text.
  std::string surface_of(const std::vector<Fragment>& fragments) const;

  std::size_t token_count() const;

  bool operator==(const AnnotatedDocument&) const = default;
};

}  // namespace mex::corpus
