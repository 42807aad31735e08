#include "mex/workbench/bundle.hpp"

#include <ctime>
#include <filesystem>

#include "mex/core/binary_io.hpp"
#include "mex/core/error.hpp"
#include "mex/core/hash.hpp"

namespace fs = std::filesystem;

namespace mex::workbench {

const char* stage_name(ComponentKind k) {
  switch (k) {
    case ComponentKind::kPosTagger: return "pos";
    case ComponentKind::kConceptTagger: return "concepts";
    case ComponentKind::kRelationModel: return "relations";
  }
  return "?";
}

ComponentKind parse_stage(const std::string& name) {
  if (name == "pos") return ComponentKind::kPosTagger;
  if (name == "concepts") return ComponentKind::kConceptTagger;
  if (name == "relations") return ComponentKind::kRelationModel;
  throw Error("unknown pipeline stage '" + name + "' (expected pos, concepts or relations)");
}

namespace {

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 15];
  return s;
}

std::string utc_now() {
  const auto t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string component_bytes(const Component& c) {
  BinaryWriter w;
  w.str(stage_name(c.kind));
  w.u64(c.schema_fingerprint);
  if (c.kind == ComponentKind::kRelationModel) {
    if (!c.relations) throw Error("relation component has no model");
    c.relations->write(w);
  } else {
    if (!c.tagger) throw Error(std::string(stage_name(c.kind)) + " component has no model");
    c.tagger->write(w);
  }
  return wrap_container(kComponentMagic, kComponentVersion, w.bytes());
}

Component component_from_bytes(std::string_view bytes, const std::string& what) {
  const auto payload = unwrap_container(bytes, kComponentMagic, kComponentVersion, what);
  BinaryReader r(payload);
  Component c;
  try {
    c.kind = parse_stage(r.str());
    c.schema_fingerprint = r.u64();
    if (c.kind == ComponentKind::kRelationModel) {
      c.relations = std::make_shared<const relation::RelationModel>(relation::RelationModel::read_from(r));
    } else {
      c.tagger = std::make_shared<const tagger::TaggerModel>(tagger::TaggerModel::read_from(r));
      const bool pos = c.tagger->task() == tagger::TaggerTask::kPos;
      if (pos != (c.kind == ComponentKind::kPosTagger)) throw FormatError("tagger task does not match its stage");
    }
  } catch (const FormatError& e) {
    throw FormatError(what + ": " + e.what());
  }
  if (!r.at_end()) throw FormatError(what + ": trailing bytes after the model");
  return c;
}

void save_component(const std::string& path, const Component& c) { write_file(path, component_bytes(c)); }

Component load_component(const std::string& path) { return component_from_bytes(read_file(path), path); }

Component make_component(const tagger::TaggerModel& m, const corpus::Schema& schema) {
  Component c;
  c.kind = m.task() == tagger::TaggerTask::kPos ? ComponentKind::kPosTagger : ComponentKind::kConceptTagger;
  c.schema_fingerprint = schema.fingerprint();
  c.tagger = std::make_shared<const tagger::TaggerModel>(m);
  return c;
}

Component make_component(const relation::RelationModel& m, const corpus::Schema& schema) {
  Component c;
  c.kind = ComponentKind::kRelationModel;
  c.schema_fingerprint = schema.fingerprint();
  c.relations = std::make_shared<const relation::RelationModel>(m);
  return c;
}

void check_fingerprint(std::uint64_t found, const corpus::Schema& schema, const std::string& what) {
  if (found != schema.fingerprint()) {
    throw Error(what + ": schema fingerprint mismatch (model " + hex64(found) + ", schema " +
                schema.fingerprint_hex() + ")");
  }
}

nlohmann::ordered_json BundleManifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "mex-bundle";
  j["version"] = version;
  j["created_by"] = created_by;
  j["created_at"] = created_at;
  j["schema_fingerprint"] = schema_fingerprint;
  j["components"] = nlohmann::ordered_json::array();
  for (const auto& e : components) {
    nlohmann::ordered_json c;
    c["stage"] = e.stage;
    c["file"] = e.file;
    c["bytes"] = e.bytes;
    c["checksum"] = e.checksum;
    j["components"].push_back(std::move(c));
  }
  j["tokenizer"] = {{"file", tokenizer_file}, {"checksum", tokenizer_checksum}};
  return j;
}

BundleManifest BundleManifest::from_json(const nlohmann::json& j) {
  BundleManifest m;
  try {
    if (j.at("format").get<std::string>() != "mex-bundle") throw FormatError("not a model bundle manifest");
    m.version = j.at("version").get<std::uint32_t>();
    if (m.version != kBundleVersion) {
      throw FormatError("bundle format version " + std::to_string(m.version) + " found, expected " +
                        std::to_string(kBundleVersion));
    }
    m.created_by = j.at("created_by").get<std::string>();
    m.created_at = j.at("created_at").get<std::string>();
    m.schema_fingerprint = j.at("schema_fingerprint").get<std::string>();
    for (const auto& c : j.at("components")) {
      m.components.push_back({c.at("stage").get<std::string>(), c.at("file").get<std::string>(),
                              c.at("bytes").get<std::uint64_t>(), c.at("checksum").get<std::string>()});
    }
    m.tokenizer_file = j.at("tokenizer").at("file").get<std::string>();
    m.tokenizer_checksum = j.at("tokenizer").at("checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad bundle manifest: ") + e.what());
  }
  return m;
}

void save_bundle(ModelBundle& bundle, const std::string& dir) {
  fs::create_directories(dir);
  auto& m = bundle.manifest;
  m.version = kBundleVersion;
  if (m.created_by.empty()) m.created_by = "mex 0.1.0";
  if (m.created_at.empty()) m.created_at = utc_now();
  m.schema_fingerprint = bundle.schema.fingerprint_hex();
  m.components.clear();
  auto put = [&](const Component& c) {
    const auto bytes = component_bytes(c);
    const std::string file = std::string(stage_name(c.kind)) + ".mexw";
    write_file((fs::path(dir) / file).string(), bytes);
    m.components.push_back({stage_name(c.kind), file, bytes.size(), hex64(fnv1a64(bytes))});
  };
  if (bundle.pos) put(make_component(*bundle.pos, bundle.schema));
  if (bundle.concepts) put(make_component(*bundle.concepts, bundle.schema));
  if (bundle.relations) put(make_component(*bundle.relations, bundle.schema));

  std::string abbrev;
  for (const auto& a : bundle.tokenizer.abbreviation_list()) abbrev += a + "\n";
  m.tokenizer_file = "tokenizer.txt";
  m.tokenizer_checksum = hex64(fnv1a64(abbrev));
  write_file((fs::path(dir) / m.tokenizer_file).string(), abbrev);
  write_file((fs::path(dir) / "manifest.json").string(), m.to_json().dump(2) + "\n");
}

ModelBundle load_bundle(const std::string& dir, const corpus::Schema& schema) {
  const auto manifest_path = (fs::path(dir) / "manifest.json").string();
  if (!fs::exists(manifest_path)) throw Error(dir + ": no manifest.json, not a model bundle");
  ModelBundle b;
  try {
    b.manifest = BundleManifest::from_json(nlohmann::json::parse(read_file(manifest_path)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(manifest_path + ": " + e.what());
  }
  if (b.manifest.schema_fingerprint != schema.fingerprint_hex()) {
    throw Error(dir + ": schema fingerprint mismatch (bundle " + b.manifest.schema_fingerprint + ", schema " +
                schema.fingerprint_hex() + ")");
  }
  b.schema = schema;

  auto read_checked = [&](const std::string& file, const std::string& checksum) {
    const auto path = (fs::path(dir) / file).string();
    if (!fs::exists(path)) throw Error(dir + ": component file " + file + " listed in the manifest is missing");
    auto bytes = read_file(path);
    if (hex64(fnv1a64(bytes)) != checksum) throw FormatError(path + ": checksum mismatch (file is corrupt)");
    return bytes;
  };
  for (const auto& e : b.manifest.components) {
    const auto bytes = read_checked(e.file, e.checksum);
    const auto c = component_from_bytes(bytes, (fs::path(dir) / e.file).string());
    if (stage_name(c.kind) != e.stage) throw FormatError(e.file + ": holds a " + stage_name(c.kind) + " model");
    check_fingerprint(c.schema_fingerprint, schema, e.file);
    switch (c.kind) {
      case ComponentKind::kPosTagger: b.pos = c.tagger; break;
      case ComponentKind::kConceptTagger: b.concepts = c.tagger; break;
      case ComponentKind::kRelationModel: b.relations = c.relations; break;
    }
  }
  b.tokenizer = corpus::TokenizerConfig{};
  b.tokenizer.extend_from_text(read_checked(b.manifest.tokenizer_file, b.manifest.tokenizer_checksum));
  return b;
}

}  // namespace mex::workbench
