#include "mex/corpus/standoff.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "mex/core/error.hpp"
#include "mex/core/utf8.hpp"

namespace mex::corpus {
namespace {

std::vector<std::string_view> split_lines(std::string_view s, bool& final_newline) {
  std::vector<std::string_view> lines;
  final_newline = !s.empty() && s.back() == '\n';
  if (final_newline) s.remove_suffix(1);
  if (s.empty() && !final_newline) return lines;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find('\n', start);
    lines.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return lines;
}

std::size_t parse_offset(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw ParseError(line, "invalid offset '" + std::string(s) + "'");
  }
  return v;
}

// Splits on single spaces; empty fields are kept.
std::vector<std::string_view> split_spaces(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(' ', start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool valid_id(std::string_view id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return false;
  for (std::size_t i = 1; i < id.size(); ++i) {
    const char c = id[i];
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
      return false;
    }
  }
  return true;
}

class Parser {
 public:
  Parser(const Schema& schema, const ParseOptions& options, ParseResult& out)
      : schema_(schema), options_(options), out_(out), doc_(out.doc) {}

  void line(std::size_t no, std::string_view text) {
    if (text.empty() || text[0] == '#') {
      verbatim(text);
      return;
    }
    switch (text[0]) {
      case 'T': span(no, text); break;
      case 'R': relation(no, text); break;
      case 'A':
      case 'M': attribute(no, text); break;
      default: verbatim(text); break;
    }
  }

  void finish() {
    std::set<std::string> span_ids;
    for (const auto& s : doc_.spans) span_ids.insert(s.id);
    for (const auto& [idx, no] : relation_lines_) {
      const auto& r = doc_.relations[idx];
      for (const auto* arg : {&r.arg1, &r.arg2}) {
        if (!span_ids.count(*arg)) {
          throw ParseError(no, "relation " + r.id + " references unknown span " + *arg);
        }
      }
      const auto* a1 = doc_.find_span(r.arg1);
      const auto* a2 = doc_.find_span(r.arg2);
      if (schema_.has_relation(r.relation) &&
          !schema_.signature_allows(r.relation, a1->type, a2->type)) {
        warn(no, "relation " + r.id + " (" + r.relation + ") violates argument signature: " +
                     a1->type + " -> " + a2->type);
      }
    }
    for (const auto& [idx, no] : attribute_lines_) {
      const auto& a = doc_.attributes[idx];
      if (!span_ids.count(a.target)) {
        throw ParseError(no, "attribute " + a.id + " references unknown span " + a.target);
      }
    }
  }

 private:
  void verbatim(std::string_view text) {
    doc_.order.push_back({RecordRef::Kind::kVerbatim, std::to_string(doc_.verbatim.size())});
    doc_.verbatim.emplace_back(text);
  }

  void warn(std::size_t no, std::string msg) { out_.warnings.push_back({no, std::move(msg)}); }

  void unknown_name(std::size_t no, const std::string& what) {
    if (options_.unknown_names == UnknownNames::kReject) throw ParseError(no, what);
    warn(no, what);
  }

  void claim_id(std::size_t no, const std::string& id) {
    if (!ids_.insert(id).second) throw ParseError(no, "duplicate id " + id);
  }

  void span(std::size_t no, std::string_view text) {
    const auto tab1 = text.find('\t');
    const auto tab2 = tab1 == std::string_view::npos ? tab1 : text.find('\t', tab1 + 1);
    if (tab2 == std::string_view::npos) {
      throw ParseError(no, "span record needs three tab-separated fields");
    }
    SpanAnnotation s;
    s.id = std::string(text.substr(0, tab1));
    if (!valid_id(s.id, 'T')) throw ParseError(no, "invalid span id '" + s.id + "'");
    const auto body = text.substr(tab1 + 1, tab2 - tab1 - 1);
    s.surface = std::string(text.substr(tab2 + 1));

    const auto sp = body.find(' ');
    if (sp == std::string_view::npos) throw ParseError(no, "span record without offsets");
    s.type = std::string(body.substr(0, sp));
    if (s.type.empty()) throw ParseError(no, "empty concept type");
    auto rest = body.substr(sp + 1);
    while (true) {
      const auto semi = rest.find(';');
      const auto frag = rest.substr(0, semi);
      const auto parts = split_spaces(frag);
      if (parts.size() != 2) {
        throw ParseError(no, "malformed fragment '" + std::string(frag) + "'");
      }
      Fragment f{parse_offset(parts[0], no), parse_offset(parts[1], no)};
      if (f.start >= f.end) throw ParseError(no, "empty or inverted fragment");
      if (f.end > doc_.text.size()) {
        throw ParseError(no, "offset " + std::to_string(f.end) + " beyond document length " +
                                 std::to_string(doc_.text.size()));
      }
      if (!s.fragments.empty() && f.start < s.fragments.back().end) {
        throw ParseError(no, "fragments must be sorted and non-overlapping");
      }
      s.fragments.push_back(f);
      if (semi == std::string_view::npos) break;
      rest = rest.substr(semi + 1);
    }
    const auto expected = doc_.surface_of(s.fragments);
    if (expected != s.surface) {
      throw ParseError(no, "surface mismatch for " + s.id + ": file has '" + s.surface +
                               "', text has '" + expected + "'");
    }
    if (!schema_.has_concept(s.type)) unknown_name(no, "unknown concept type '" + s.type + "'");
    claim_id(no, s.id);
    doc_.add_span(std::move(s));
  }

  void relation(std::size_t no, std::string_view text) {
    const auto tab = text.find('\t');
    if (tab == std::string_view::npos) throw ParseError(no, "relation record without tab");
    RelationAnnotation r;
    r.id = std::string(text.substr(0, tab));
    if (!valid_id(r.id, 'R')) throw ParseError(no, "invalid relation id '" + r.id + "'");
    auto body = text.substr(tab + 1);
    // Anything after the Arg2 field (brat writes a trailing tab) is kept.
    const auto arg2_pos = body.find(" Arg2:");
    if (arg2_pos == std::string_view::npos) throw ParseError(no, "relation without Arg2");
    const auto arg2_end = body.find_first_of(" \t", arg2_pos + 1);
    if (arg2_end != std::string_view::npos) {
      r.trailing = std::string(body.substr(arg2_end));
      body = body.substr(0, arg2_end);
    }
    const auto parts = split_spaces(body);
    if (parts.size() != 3 || parts[1].substr(0, 5) != "Arg1:" || parts[2].substr(0, 5) != "Arg2:") {
      throw ParseError(no, "relation must read '<Type> Arg1:<id> Arg2:<id>'");
    }
    r.relation = std::string(parts[0]);
    r.arg1 = std::string(parts[1].substr(5));
    r.arg2 = std::string(parts[2].substr(5));
    if (r.relation.empty() || r.arg1.empty() || r.arg2.empty()) {
      throw ParseError(no, "relation with empty type or argument");
    }
    if (!schema_.has_relation(r.relation)) unknown_name(no, "unknown relation type '" + r.relation + "'");
    claim_id(no, r.id);
    relation_lines_.emplace_back(doc_.relations.size(), no);
    doc_.add_relation(std::move(r));
  }

  void attribute(std::size_t no, std::string_view text) {
    const auto tab = text.find('\t');
    if (tab == std::string_view::npos) throw ParseError(no, "attribute record without tab");
    AttributeAssignment a;
    a.id = std::string(text.substr(0, tab));
    if (!valid_id(a.id, text[0])) throw ParseError(no, "invalid attribute id '" + a.id + "'");
    const auto parts = split_spaces(text.substr(tab + 1));
    if (parts.size() != 3) {
      throw ParseError(no, "attribute must read '<Family> <span id> <Value>'");
    }
    a.family = std::string(parts[0]);
    a.target = std::string(parts[1]);
    a.value = std::string(parts[2]);
    if (a.family.empty() || a.target.empty() || a.value.empty()) {
      throw ParseError(no, "attribute with empty field");
    }
    if (const auto* fam = schema_.attribute(a.family)) {
      bool ok = false;
      for (const auto& v : fam->values) ok = ok || v == a.value;
      if (!ok) unknown_name(no, "value '" + a.value + "' not in attribute family " + a.family);
    } else {
      unknown_name(no, "unknown attribute family '" + a.family + "'");
    }
    claim_id(no, a.id);
    attribute_lines_.emplace_back(doc_.attributes.size(), no);
    doc_.add_attribute(std::move(a));
  }

  const Schema& schema_;
  const ParseOptions& options_;
  ParseResult& out_;
  AnnotatedDocument& doc_;
  std::set<std::string> ids_;
  std::vector<std::pair<std::size_t, std::size_t>> relation_lines_;
  std::vector<std::pair<std::size_t, std::size_t>> attribute_lines_;
};

}  // namespace

ParseResult parse_standoff(std::string_view ann_content, std::string_view doc_content,
                           const Schema& schema, const ParseOptions& options) {
  ParseResult result;
  result.doc.text = utf8::decode(doc_content);
  Parser parser(schema, options, result);
  bool final_newline = false;
  const auto lines = split_lines(ann_content, final_newline);
  result.doc.final_newline = final_newline;
  for (std::size_t i = 0; i < lines.size(); ++i) parser.line(i + 1, lines[i]);
  parser.finish();
  return result;
}

StandoffFiles export_standoff(const AnnotatedDocument& doc) {
  std::string ann;
  bool first = true;
  auto emit = [&](const std::string& line) {
    if (!first) ann.push_back('\n');
    ann += line;
    first = false;
  };
  std::set<std::string> emitted;
  auto span_line = [](const SpanAnnotation& s) {
    std::string line = s.id + "\t" + s.type + " ";
    for (std::size_t i = 0; i < s.fragments.size(); ++i) {
      if (i) line += ";";
      line += std::to_string(s.fragments[i].start) + " " + std::to_string(s.fragments[i].end);
    }
    return line + "\t" + s.surface;
  };
  auto relation_line = [](const RelationAnnotation& r) {
    return r.id + "\t" + r.relation + " Arg1:" + r.arg1 + " Arg2:" + r.arg2 + r.trailing;
  };
  auto attribute_line = [](const AttributeAssignment& a) {
    return a.id + "\t" + a.family + " " + a.target + " " + a.value;
  };

  std::map<std::string_view, const SpanAnnotation*> span_by_id;
  std::map<std::string_view, const RelationAnnotation*> rel_by_id;
  std::map<std::string_view, const AttributeAssignment*> attr_by_id;
  for (const auto& s : doc.spans) span_by_id.emplace(s.id, &s);
  for (const auto& r : doc.relations) rel_by_id.emplace(r.id, &r);
  for (const auto& a : doc.attributes) attr_by_id.emplace(a.id, &a);

  for (const auto& ref : doc.order) {
    switch (ref.kind) {
      case RecordRef::Kind::kVerbatim:
        emit(doc.verbatim.at(std::stoul(ref.key)));
        break;
      case RecordRef::Kind::kSpan:
        if (auto it = span_by_id.find(ref.key); it != span_by_id.end() &&
                                                emitted.insert("T:" + ref.key).second) {
          emit(span_line(*it->second));
        }
        break;
      case RecordRef::Kind::kRelation:
        if (auto it = rel_by_id.find(ref.key); it != rel_by_id.end() &&
                                               emitted.insert("R:" + ref.key).second) {
          emit(relation_line(*it->second));
        }
        break;
      case RecordRef::Kind::kAttribute:
        if (auto it = attr_by_id.find(ref.key); it != attr_by_id.end() &&
                                                emitted.insert("A:" + ref.key).second) {
          emit(attribute_line(*it->second));
        }
        break;
    }
  }
  // Annotations added without an order entry go last.
  for (const auto& s : doc.spans) {
    if (emitted.insert("T:" + s.id).second) emit(span_line(s));
  }
  for (const auto& r : doc.relations) {
    if (emitted.insert("R:" + r.id).second) emit(relation_line(r));
  }
  for (const auto& a : doc.attributes) {
    if (emitted.insert("A:" + a.id).second) emit(attribute_line(a));
  }
  if (!first && doc.final_newline) ann.push_back('\n');
  return {std::move(ann), doc.text_utf8()};
}

}  // namespace mex::corpus
