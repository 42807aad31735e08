#include "mex/corpus/schema.hpp"

#include <cstdio>
#include <sstream>

#include "mex/core/binary_io.hpp"
#include "mex/core/error.hpp"
#include "mex/core/hash.hpp"

namespace mex::corpus {

// Generated from data/mex_schema.conf.
extern const char* const kBuiltinSchemaText;

namespace {

constexpr std::string_view kAnyEntity = "<ENTITY>";

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Parses "Key:A|B" into the alternatives; `key` must match.
std::vector<std::string> parse_arg(const std::string& part, std::string_view key,
                                   std::size_t line) {
  const auto colon = part.find(':');
  if (colon == std::string::npos || trim(part.substr(0, colon)) != key) {
    throw ParseError(line, "expected '" + std::string(key) + ":' in '" + part + "'");
  }
  auto alts = split(part.substr(colon + 1), '|');
  for (const auto& a : alts) {
    if (a.empty()) throw ParseError(line, "empty alternative in '" + part + "'");
  }
  return alts;
}

}  // namespace

std::string_view group_name(ConceptGroup g) {
  switch (g) {
    case ConceptGroup::kCentral: return "central";
    case ConceptGroup::kRelating: return "relating";
    case ConceptGroup::kSpecifying: return "specifying";
  }
  return "";
}

Schema Schema::parse(std::string_view conf) {
  Schema schema;
  enum class Section { kNone, kEntities, kRelations, kAttributes, kOther };
  Section section = Section::kNone;
  std::optional<ConceptGroup> group;

  struct PendingRelation {
    std::string name;
    std::vector<std::string> arg1, arg2;
    std::size_t line;
  };
  std::vector<PendingRelation> pending;

  std::istringstream in{std::string(conf)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      const auto name = line.substr(1, line.size() - 2);
      if (name == "entities") section = Section::kEntities;
      else if (name == "relations") section = Section::kRelations;
      else if (name == "attributes") section = Section::kAttributes;
      else section = Section::kOther;
      continue;
    }
    switch (section) {
      case Section::kNone:
        throw ParseError(line_no, "declaration outside of a section");
      case Section::kOther:
        break;
      case Section::kEntities: {
        if (line[0] == '!') {
          const auto g = line.substr(1);
          if (g == "Central") group = ConceptGroup::kCentral;
          else if (g == "Relating") group = ConceptGroup::kRelating;
          else if (g == "Specifying") group = ConceptGroup::kSpecifying;
          else throw ParseError(line_no, "unknown concept group '" + g + "'");
          break;
        }
        if (!group) throw ParseError(line_no, "concept '" + line + "' has no group");
        if (line.find_first_of(" \t") != std::string::npos) {
          throw ParseError(line_no, "concept names may not contain whitespace");
        }
        if (schema.concept_index_.count(line)) {
          throw ParseError(line_no, "duplicate concept '" + line + "'");
        }
        schema.concept_index_.emplace(line, static_cast<int>(schema.concepts_.size()));
        schema.concepts_.push_back({line, *group});
        break;
      }
      case Section::kRelations: {
        const auto ws = line.find_first_of(" \t");
        if (ws == std::string::npos) throw ParseError(line_no, "relation without arguments");
        PendingRelation rel{line.substr(0, ws), {}, {}, line_no};
        const auto parts = split(std::string_view(line).substr(ws + 1), ',');
        if (parts.size() != 2) {
          throw ParseError(line_no, "relation needs exactly Arg1 and Arg2");
        }
        rel.arg1 = parse_arg(parts[0], "Arg1", line_no);
        rel.arg2 = parse_arg(parts[1], "Arg2", line_no);
        pending.push_back(std::move(rel));
        break;
      }
      case Section::kAttributes: {
        const auto ws = line.find_first_of(" \t");
        if (ws == std::string::npos) throw ParseError(line_no, "attribute without values");
        AttributeFamily fam{line.substr(0, ws), {}};
        const auto parts = split(std::string_view(line).substr(ws + 1), ',');
        if (parts.size() != 2) throw ParseError(line_no, "attribute needs Arg and Value");
        parse_arg(parts[0], "Arg", line_no);
        fam.values = parse_arg(parts[1], "Value", line_no);
        if (schema.attribute(fam.name)) {
          throw ParseError(line_no, "duplicate attribute family '" + fam.name + "'");
        }
        schema.attributes_.push_back(std::move(fam));
        break;
      }
    }
  }

  // Relation signatures are resolved after all concepts are known.
  auto resolve = [&](const std::vector<std::string>& alts, std::size_t line) {
    std::set<std::string> out;
    for (const auto& a : alts) {
      if (a == kAnyEntity) {
        for (const auto& c : schema.concepts_) out.insert(c.name);
      } else if (schema.has_concept(a)) {
        out.insert(a);
      } else {
        throw ParseError(line, "relation argument references undeclared concept '" + a + "'");
      }
    }
    return out;
  };
  for (const auto& p : pending) {
    if (schema.relation_index_.count(p.name)) {
      throw ParseError(p.line, "duplicate relation '" + p.name + "'");
    }
    schema.relation_index_.emplace(p.name, static_cast<int>(schema.relations_.size()));
    schema.relations_.push_back({p.name, resolve(p.arg1, p.line), resolve(p.arg2, p.line)});
  }
  return schema;
}

Schema Schema::from_file(const std::string& path) {
  try {
    return parse(read_file(path));
  } catch (const ParseError& e) {
    throw Error(path + ": " + e.what());
  }
}

std::string_view Schema::builtin_text() { return kBuiltinSchemaText; }

const Schema& Schema::builtin() {
  static const Schema schema = parse(kBuiltinSchemaText);
  return schema;
}

bool Schema::has_concept(std::string_view name) const {
  return concept_index_.find(name) != concept_index_.end();
}

bool Schema::has_relation(std::string_view name) const {
  return relation_index_.find(name) != relation_index_.end();
}

const AttributeFamily* Schema::attribute(std::string_view family) const {
  for (const auto& a : attributes_) {
    if (a.name == family) return &a;
  }
  return nullptr;
}

const RelationType* Schema::relation(std::string_view name) const {
  const auto it = relation_index_.find(name);
  return it == relation_index_.end() ? nullptr : &relations_[it->second];
}

int Schema::concept_index(std::string_view name) const {
  const auto it = concept_index_.find(name);
  return it == concept_index_.end() ? -1 : it->second;
}

int Schema::relation_index(std::string_view name) const {
  const auto it = relation_index_.find(name);
  return it == relation_index_.end() ? -1 : it->second;
}

std::vector<std::string> Schema::concept_names() const {
  std::vector<std::string> out;
  for (const auto& c : concepts_) out.push_back(c.name);
  return out;
}

std::vector<std::string> Schema::relation_names() const {
  std::vector<std::string> out;
  for (const auto& r : relations_) out.push_back(r.name);
  return out;
}

bool Schema::signature_allows(std::string_view relation, std::string_view arg1_type,
                              std::string_view arg2_type) const {
  const auto* rel = this->relation(relation);
  if (!rel) return false;
  return rel->arg1_types.count(std::string(arg1_type)) &&
         rel->arg2_types.count(std::string(arg2_type));
}

std::uint64_t Schema::fingerprint() const {
  std::uint64_t h = kFnv64Offset;
  for (const auto& c : concepts_) {
    h = fnv1a64("C:", h);
    h = fnv1a64(c.name, h);
    h = fnv1a64("\n", h);
  }
  for (const auto& r : relations_) {
    h = fnv1a64("R:", h);
    h = fnv1a64(r.name, h);
    h = fnv1a64("\n", h);
  }
  return h;
}

std::string Schema::fingerprint_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fingerprint()));
  return buf;
}

}  // namespace mex::corpus
