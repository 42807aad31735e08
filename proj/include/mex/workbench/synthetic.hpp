#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mex/core/random.hpp"
#include "mex/corpus/document.hpp"
#include "mex/corpus/schema.hpp"
#include "mex/corpus/tokenizer.hpp"

namespace mex::workbench {

struct TaggedWord {
  std::string form;
  std::string pos;
};

struct TemplateSlot {
  std::vector<TaggedWord> literal;  // empty for a concept slot
  std::string type;                 // concept type of a slot
  std::string category;             // lexicon category of a slot
};

struct TemplateLink {
  std::size_t arg1 = 0;  // 0-based slot index among concept slots
  std::size_t arg2 = 0;
  std::string relation;
};

struct TemplateAttribute {
  std::size_t slot = 0;
  std::string family;
  std::string value;
};

struct SentenceTemplate {
  std::vector<TemplateSlot> parts;
  std::vector<TemplateLink> links;
  std::vector<TemplateAttribute> attributes;
  std::size_t line = 0;
};

// Lexicon, sentence templates and abbreviation noise of the generator.
// See data/synthetic_templates.txt for the format.
class TemplateInventory {
 public:
  // Throws ParseError for malformed lines and for templates that use an
  // undeclared concept, relation or attribute, or an empty category.
  static TemplateInventory parse(std::string_view text, const corpus::Schema& schema);
  static const TemplateInventory& builtin();
  static std::string_view builtin_text();

  const std::map<std::string, std::vector<std::vector<TaggedWord>>>& lexicon() const { return lexicon_; }
  const std::vector<SentenceTemplate>& notes() const { return notes_; }
  const std::vector<SentenceTemplate>& summary() const { return summary_; }
  const std::vector<SentenceTemplate>& headings() const { return headings_; }
  const std::map<std::string, std::string>& abbreviations() const { return abbrev_; }

  std::set<std::string> concept_types() const;
  std::set<std::string> relation_types() const;

 private:
  std::map<std::string, std::vector<std::vector<TaggedWord>>> lexicon_;
  std::vector<SentenceTemplate> notes_, summary_, headings_;
  std::map<std::string, std::string> abbrev_;
};

struct SyntheticSpec {
  std::uint64_t seed = 1;
  std::size_t documents = 100;
  double summary_fraction = 0.045;  // share of long letters
  double note_tokens = 54;          // mean length of a note
  double note_spread = 20;
  double summary_tokens = 938;
  double summary_spread = 246;
  double noise_rate = 0.0;  // per word: typo or abbreviation
  std::string annotator = "annotator_a";

  void validate() const;
};

// Tokenized documents with gold POS, concepts, relations and attributes.
// Document i depends only on (seed, i).
std::vector<corpus::AnnotatedDocument> generate_corpus(const SyntheticSpec& spec,
                                                       const TemplateInventory& inventory,
                                                       const corpus::Schema& schema);

// A second annotator's version: each span is, with probability `rate`,
// dropped, retyped or shortened by one token. Relations and attributes of
// dropped spans go with them. rate 0 returns an identical copy.
corpus::AnnotatedDocument perturb_annotations(const corpus::AnnotatedDocument& doc, double rate,
                                              Rng& rng, const corpus::Schema& schema,
                                              const std::string& annotator);

struct SynthesisSummary {
  std::size_t documents = 0;
  std::size_t notes = 0;
  std::size_t summaries = 0;
  std::size_t note_tokens = 0;
  std::size_t summary_tokens = 0;
  std::size_t spans = 0;
  std::size_t relations = 0;
};

SynthesisSummary summarize(const std::vector<corpus::AnnotatedDocument>& docs);

// Writes <root>/<annotator>/<doc_type>/<id>.{txt,ann,conll}. With
// `second_annotator`, a perturbed copy of every document goes under
// <root>/annotator_b.
SynthesisSummary write_synthetic_corpus(const std::string& root, const SyntheticSpec& spec,
                                        const TemplateInventory& inventory,
                                        const corpus::Schema& schema, bool second_annotator = false,
                                        double perturbation_rate = 0.0);

}  // namespace mex::workbench
