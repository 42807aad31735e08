#include "mex/corpus/document.hpp"

#include <set>

#include "mex/core/utf8.hpp"

namespace mex::corpus {

std::string_view doc_type_name(DocType t) {
  return t == DocType::kClinicalNote ? "clinical_note" : "discharge_summary";
}

std::optional<DocType> parse_doc_type(std::string_view name) {
  if (name == "clinical_note") return DocType::kClinicalNote;
  if (name == "discharge_summary") return DocType::kDischargeSummary;
  return std::nullopt;
}

std::string AnnotatedDocument::text_utf8() const { return utf8::encode(text); }

std::string AnnotatedDocument::substring_utf8(std::size_t start,
                                              std::size_t end) const {
  return utf8::encode(std::u32string_view(text).substr(start, end - start));
}

const SpanAnnotation* AnnotatedDocument::find_span(std::string_view id) const {
  for (const auto& s : spans) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

void AnnotatedDocument::add_span(SpanAnnotation s) {
  order.push_back({RecordRef::Kind::kSpan, s.id});
  spans.push_back(std::move(s));
}

void AnnotatedDocument::add_relation(RelationAnnotation r) {
  order.push_back({RecordRef::Kind::kRelation, r.id});
  relations.push_back(std::move(r));
}

void AnnotatedDocument::add_attribute(AttributeAssignment a) {
  order.push_back({RecordRef::Kind::kAttribute, a.id});
  attributes.push_back(std::move(a));
}

void AnnotatedDocument::prune_order() {
  std::set<std::string> span_ids, rel_ids, attr_ids;
  for (const auto& s : spans) span_ids.insert(s.id);
  for (const auto& r : relations) rel_ids.insert(r.id);
  for (const auto& a : attributes) attr_ids.insert(a.id);
  std::vector<RecordRef> kept;
  for (auto& ref : order) {
    bool keep = true;
    switch (ref.kind) {
      case RecordRef::Kind::kSpan: keep = span_ids.count(ref.key) > 0; break;
      case RecordRef::Kind::kRelation: keep = rel_ids.count(ref.key) > 0; break;
      case RecordRef::Kind::kAttribute: keep = attr_ids.count(ref.key) > 0; break;
      case RecordRef::Kind::kVerbatim: break;
    }
    if (keep) kept.push_back(std::move(ref));
  }
  order = std::move(kept);
}

std::string AnnotatedDocument::surface_of(
    const std::vector<Fragment>& fragments) const {
  std::string out;
  for (std::size_t i = 0; i < fragments.size(); ++i) {
    if (i) out.push_back(' ');
    out += substring_utf8(fragments[i].start, fragments[i].end);
  }
  return out;
}

std::size_t AnnotatedDocument::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

}  // namespace mex::corpus
