#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mex/corpus/bioes.hpp"
#include "mex/corpus/document.hpp"

namespace mex::corpus {

struct ConllToken {
  std::string form;
  std::string pos;
  std::string tag;
};

struct ConllSentence {
  std::vector<ConllToken> tokens;
};

struct ConllDocument {
  std::string doc_id;
  std::string provenance;
  std::vector<ConllSentence> sentences;
};

// Three tab-separated columns (FORM, POS, concept tag), a "#doc <id>"
// header, blank line after every sentence. Untagged POS is written as "_".
// Throws mex::Error naming the span when a span is discontinuous.
std::string export_conll(const AnnotatedDocument& doc, TagScheme scheme = TagScheme::kBIOES);

std::vector<ConllDocument> parse_conll(std::string_view content);

}  // namespace mex::corpus
