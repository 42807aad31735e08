#pragma once

#include <map>
#include <string>
#include <vector>

#include "mex/core/binary_io.hpp"
#include "mex/corpus/bioes.hpp"
#include "mex/corpus/schema.hpp"

namespace mex::tagger {

enum class TaggerTask { kPos, kConcepts };

const char* task_name(TaggerTask t);
TaggerTask parse_task(const std::string& name);

// Ordered label set. Concept vocabularies start with "O", followed by the
// scheme prefixes of every schema concept in declaration order.
class LabelVocab {
 public:
  LabelVocab() = default;
  explicit LabelVocab(std::vector<std::string> labels);

  static LabelVocab for_concepts(const corpus::Schema& schema, corpus::TagScheme scheme);
  // Tags observed in `sequences`, sorted.
  static LabelVocab observed(const std::vector<std::vector<std::string>>& sequences);

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  int index(const std::string& label) const;
  bool contains(const std::string& label) const { return index_.count(label) > 0; }
  const std::vector<std::string>& labels() const { return labels_; }

  void write(BinaryWriter& w) const;
  static LabelVocab read_from(BinaryReader& r);

  bool operator==(const LabelVocab& o) const { return labels_ == o.labels_; }

 private:
  std::vector<std::string> labels_;
  std::map<std::string, int> index_;
};

// Whether `next` may follow `prev` under the scheme. Empty strings stand for
// the virtual start (as prev) and stop (as next) states.
bool transition_allowed(const std::string& prev, const std::string& next, corpus::TagScheme scheme);

}  // namespace mex::tagger
