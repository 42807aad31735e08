#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace mex::corpus {

enum class ConceptGroup { kCentral, kRelating, kSpecifying };

std::string_view group_name(ConceptGroup g);

struct ConceptType {
  std::string name;
  ConceptGroup group;
};

struct RelationType {
  std::string name;
  std::set<std::string> arg1_types;
  std::set<std::string> arg2_types;
};

struct AttributeFamily {
  std::string name;
  std::vector<std::string> values;
};

// Closed annotation vocabulary: concept types, directed relation signatures
// and attribute families. Declared in a brat-style configuration file.
class Schema {
 public:
  // Parses the declaration format:
  //
  //   [entities]
  //   !Central
  //       Medical_condition
  //   [relations]
  //   Has_dosing   Arg1:Medication|Treatment, Arg2:Dosing
  //   [attributes]
  //   DocTime      Arg:<ENTITY>, Value:Past|Future|Past_present
  //
  // `<ENTITY>` expands to every declared concept type.
  static Schema parse(std::string_view conf);
  static Schema from_file(const std::string& path);

  // The shipped schema: 17 concepts, 9 relations, 2 attribute families.
  static const Schema& builtin();
  static std::string_view builtin_text();

  const std::vector<ConceptType>& concepts() const { return concepts_; }
  const std::vector<RelationType>& relations() const { return relations_; }
  const std::vector<AttributeFamily>& attributes() const { return attributes_; }

  bool has_concept(std::string_view name) const;
  bool has_relation(std::string_view name) const;
  const AttributeFamily* attribute(std::string_view family) const;
  const RelationType* relation(std::string_view name) const;

  // Index in declaration order, or -1.
  int concept_index(std::string_view name) const;
  int relation_index(std::string_view name) const;

  std::vector<std::string> concept_names() const;
  std::vector<std::string> relation_names() const;

  bool signature_allows(std::string_view relation, std::string_view arg1_type,
                        std::string_view arg2_type) const;

  // Stable hash over the ordered concept and relation vocabularies.
  std::uint64_t fingerprint() const;
  std::string fingerprint_hex() const;

 private:
  std::vector<ConceptType> concepts_;
  std::vector<RelationType> relations_;
  std::vector<AttributeFamily> attributes_;
  std::map<std::string, int, std::less<>> concept_index_;
  std::map<std::string, int, std::less<>> relation_index_;
};

}  // namespace mex::corpus
