#pragma once

#include <map>
#include <string>
#include <vector>

#include "mex/corpus/conll.hpp"
#include "mex/corpus/document.hpp"
#include "mex/corpus/schema.hpp"
#include "mex/corpus/standoff.hpp"
#include "mex/corpus/tokenizer.hpp"

namespace mex::corpus {

// Corpus layout on disk:
//
//   <root>/<annotator>/<doc_type>/<doc_id>.txt
//   <root>/<annotator>/<doc_type>/<doc_id>.ann
//   <root>/<annotator>/<doc_type>/<doc_id>.conll   (optional, gold POS)
//
// <doc_type> is clinical_note or discharge_summary. Files directly under
// <annotator>/ are read as clinical notes.
struct LoadedCorpus {
  std::map<std::string, std::vector<AnnotatedDocument>> by_annotator;
  std::vector<std::string> warnings;

  std::vector<std::string> annotators() const;
  // All versions of all annotators.
  std::vector<AnnotatedDocument> all_versions() const;
};

// Loads and tokenizes every document; POS from .conll sidecars is attached
// to the tokens. Documents are sorted by doc_id.
LoadedCorpus load_corpus(const std::string& root, const Schema& schema,
                         const Tokenizer& tokenizer, const ParseOptions& options = {});

std::vector<AnnotatedDocument> load_annotator_dir(const std::string& dir,
                                                  const std::string& annotator,
                                                  const Schema& schema,
                                                  const Tokenizer& tokenizer,
                                                  const ParseOptions& options,
                                                  std::vector<std::string>* warnings);

// Writes .txt/.ann (and .conll when the document is tokenized and
// `with_conll`) under <annotator_dir>/<doc_type>/.
void save_document(const std::string& annotator_dir, const AnnotatedDocument& doc,
                   bool with_conll);

// Copies POS tags from a CoNLL document onto doc's tokens. Throws when the
// token forms differ.
void attach_pos(AnnotatedDocument& doc, const ConllDocument& conll);

}  // namespace mex::corpus
