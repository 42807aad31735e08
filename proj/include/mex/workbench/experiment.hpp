#pragma once

#include <string>
#include <vector>

#include "mex/corpus/document.hpp"
#include "mex/corpus/normalize.hpp"
#include "mex/corpus/schema.hpp"
#include "mex/embed/subword.hpp"
#include "mex/eval/metrics.hpp"
#include "mex/relation/model.hpp"
#include "mex/tagger/tagger.hpp"

namespace mex::workbench {

// Loads a corpus directory, keeps one version per document (see
// merge_annotators) and normalizes it with concept frequencies from the
// same documents. `report` receives the summed normalization counts.
std::vector<corpus::AnnotatedDocument> load_documents(const std::string& dir, const corpus::Schema& schema,
                                                      corpus::NormalizationReport* report = nullptr);

std::vector<corpus::AnnotatedDocument> normalize_all(const std::vector<corpus::AnnotatedDocument>& docs,
                                                     const corpus::ConceptFrequency& freq,
                                                     corpus::NormalizationReport* report = nullptr);

// Token strings of every sentence.
embed::Sentences token_sentences(const std::vector<corpus::AnnotatedDocument>& docs);

// Copies of `docs` whose spans are the tagger's predictions over the gold
// tokenization. Relations and attributes are cleared.
std::vector<corpus::AnnotatedDocument> predict_concepts(const tagger::TaggerModel& model,
                                                        const std::vector<corpus::AnnotatedDocument>& docs);

eval::EvalReport evaluate_concepts(const tagger::TaggerModel& model,
                                   const std::vector<corpus::AnnotatedDocument>& docs, eval::MatchMode mode,
                                   const corpus::Schema& schema);

// Token accuracy against the gold POS of the documents.
double evaluate_pos(const tagger::TaggerModel& model, const std::vector<corpus::AnnotatedDocument>& docs);

// Classification of every candidate between gold concepts; NO_RELATION is
// left out of the counts.
eval::EvalReport evaluate_relations(const relation::RelationModel& model,
                                    const std::vector<corpus::AnnotatedDocument>& docs,
                                    const relation::CandidatePolicy& policy, const corpus::Schema& schema);

// Relations predicted over the concept tagger's spans, matched to the gold
// relations by type and argument character ranges.
eval::EvalReport evaluate_relation_pipeline(const tagger::TaggerModel& concepts,
                                            const relation::RelationModel& relations,
                                            const std::vector<corpus::AnnotatedDocument>& docs,
                                            const relation::CandidatePolicy& policy, const corpus::Schema& schema,
                                            double threshold = 0.5);

}  // namespace mex::workbench
