#include "mex/tagger/labels.hpp"

#include <set>

#include "mex/core/error.hpp"

namespace mex::tagger {

const char* task_name(TaggerTask t) { return t == TaggerTask::kPos ? "pos" : "concepts"; }

TaggerTask parse_task(const std::string& name) {
  if (name == "pos") return TaggerTask::kPos;
  if (name == "concepts") return TaggerTask::kConcepts;
  throw Error("unknown tagger task '" + name + "' (expected pos or concepts)");
}

LabelVocab::LabelVocab(std::vector<std::string> labels) : labels_(std::move(labels)) {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw Error("empty label in label vocabulary");
    if (!index_.emplace(labels_[i], static_cast<int>(i)).second) {
      throw Error("duplicate label '" + labels_[i] + "' in label vocabulary");
    }
  }
}

LabelVocab LabelVocab::for_concepts(const corpus::Schema& schema, corpus::TagScheme scheme) {
  std::vector<std::string> labels{"O"};
  const std::string prefixes = scheme == corpus::TagScheme::kBIOES ? "BIES" : "BI";
  for (const auto& c : schema.concepts()) {
    for (const char p : prefixes) labels.push_back(std::string(1, p) + "-" + c.name);
  }
  return LabelVocab(std::move(labels));
}

LabelVocab LabelVocab::observed(const std::vector<std::vector<std::string>>& sequences) {
  std::set<std::string> seen;
  for (const auto& s : sequences) seen.insert(s.begin(), s.end());
  return LabelVocab(std::vector<std::string>(seen.begin(), seen.end()));
}

int LabelVocab::index(const std::string& label) const {
  const auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

void LabelVocab::write(BinaryWriter& w) const {
  w.u64(labels_.size());
  for (const auto& l : labels_) w.str(l);
}

LabelVocab LabelVocab::read_from(BinaryReader& r) {
  const auto n = r.u64();
  std::vector<std::string> labels;
  for (std::uint64_t i = 0; i < n; ++i) labels.push_back(r.str());
  try {
    return LabelVocab(std::move(labels));
  } catch (const Error& e) {
    throw FormatError(e.what());
  }
}

bool transition_allowed(const std::string& prev, const std::string& next, corpus::TagScheme scheme) {
  const auto [p, ptype] = prev.empty() ? std::pair<char, std::string>{'O', ""} : corpus::split_tag(prev);
  const auto [n, ntype] = next.empty() ? std::pair<char, std::string>{'O', ""} : corpus::split_tag(next);
  if (scheme == corpus::TagScheme::kBIO) {
    if (n == 'I') return (p == 'B' || p == 'I') && ptype == ntype;
    return true;
  }
  const bool open = p == 'B' || p == 'I';
  if (open) return (n == 'I' || n == 'E') && ptype == ntype && !next.empty();
  return n == 'O' || n == 'B' || n == 'S';
}

}  // namespace mex::tagger
