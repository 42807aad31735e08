#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mex/corpus/schema.hpp"
#include "mex/corpus/tokenizer.hpp"
#include "mex/relation/model.hpp"
#include "mex/tagger/tagger.hpp"

namespace mex::workbench {

inline constexpr std::uint32_t kComponentVersion = 1;
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr const char* kComponentMagic = "MEXW";

enum class ComponentKind { kPosTagger, kConceptTagger, kRelationModel };

// "pos", "concepts", "relations": the pipeline stage the component serves.
const char* stage_name(ComponentKind k);
ComponentKind parse_stage(const std::string& name);

// A trained model as stored on disk: MEXW container holding the stage
// name, the schema fingerprint and the model bytes.
struct Component {
  ComponentKind kind = ComponentKind::kConceptTagger;
  std::uint64_t schema_fingerprint = 0;
  std::shared_ptr<const tagger::TaggerModel> tagger;
  std::shared_ptr<const relation::RelationModel> relations;
};

std::string component_bytes(const Component& c);
Component component_from_bytes(std::string_view bytes, const std::string& what);

void save_component(const std::string& path, const Component& c);
Component load_component(const std::string& path);

Component make_component(const tagger::TaggerModel& m, const corpus::Schema& schema);
Component make_component(const relation::RelationModel& m, const corpus::Schema& schema);

// Throws Error naming both fingerprints when they differ.
void check_fingerprint(std::uint64_t found, const corpus::Schema& schema, const std::string& what);

struct ManifestEntry {
  std::string stage;
  std::string file;
  std::uint64_t bytes = 0;
  std::string checksum;  // fnv1a64 of the file, hex
};

struct BundleManifest {
  std::uint32_t version = kBundleVersion;
  std::string created_by;
  std::string created_at;
  std::string schema_fingerprint;
  std::vector<ManifestEntry> components;
  std::string tokenizer_file;
  std::string tokenizer_checksum;

  nlohmann::ordered_json to_json() const;
  static BundleManifest from_json(const nlohmann::json& j);
};

// Models for every stage of the annotate pipeline. The models are shared
// read-only; requests never modify them.
struct ModelBundle {
  BundleManifest manifest;
  corpus::Schema schema;
  corpus::TokenizerConfig tokenizer;
  std::shared_ptr<const tagger::TaggerModel> pos;
  std::shared_ptr<const tagger::TaggerModel> concepts;
  std::shared_ptr<const relation::RelationModel> relations;
};

// Directory layout: manifest.json, pos.mexw, concepts.mexw,
// relations.mexw, tokenizer.txt. Absent stages are left out.
void save_bundle(ModelBundle& bundle, const std::string& dir);

// Validates the manifest version, file checksums, component containers and
// the schema fingerprint against `schema`.
ModelBundle load_bundle(const std::string& dir, const corpus::Schema& schema);

}  // namespace mex::workbench
