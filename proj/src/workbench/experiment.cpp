#include "mex/workbench/experiment.hpp"

#include "mex/core/error.hpp"
#include "mex/corpus/corpus_io.hpp"

namespace mex::workbench {

std::vector<corpus::AnnotatedDocument> normalize_all(const std::vector<corpus::AnnotatedDocument>& docs,
                                                     const corpus::ConceptFrequency& freq,
                                                     corpus::NormalizationReport* report) {
  std::vector<corpus::AnnotatedDocument> out;
  const corpus::NormalizationPolicy policy;
  for (const auto& d : docs) {
    auto r = corpus::normalize_document(d, policy, freq);
    if (report) *report += r.report;
    out.push_back(std::move(r.doc));
  }
  return out;
}

std::vector<corpus::AnnotatedDocument> load_documents(const std::string& dir, const corpus::Schema& schema,
                                                      corpus::NormalizationReport* report) {
  const auto loaded = corpus::load_corpus(dir, schema, corpus::Tokenizer());
  const auto versions = loaded.all_versions();
  if (versions.empty()) throw Error(dir + ": no documents found");
  const auto merged = corpus::merge_annotators(versions).docs;
  return normalize_all(merged, corpus::concept_frequencies(merged), report);
}

embed::Sentences token_sentences(const std::vector<corpus::AnnotatedDocument>& docs) {
  embed::Sentences out;
  for (const auto& d : docs) {
    for (const auto& s : d.sentences) {
      std::vector<std::string> words;
      for (const auto& t : s.tokens) words.push_back(d.substring_utf8(t.start, t.end));
      out.push_back(std::move(words));
    }
  }
  return out;
}

std::vector<corpus::AnnotatedDocument> predict_concepts(const tagger::TaggerModel& model,
                                                        const std::vector<corpus::AnnotatedDocument>& docs) {
  std::vector<corpus::AnnotatedDocument> out;
  for (const auto& d : docs) {
    corpus::AnnotatedDocument p = d;
    p.spans.clear();
    p.relations.clear();
    p.attributes.clear();
    p.prune_order();
    auto state = model.fresh_state();
    std::size_t next = 1;
    for (const auto& s : d.sentences) {
      std::vector<std::string> words;
      for (const auto& t : s.tokens) words.push_back(d.substring_utf8(t.start, t.end));
      for (const auto& sp : model.predict_spans(words, state)) {
        corpus::SpanAnnotation a;
        a.id = "T" + std::to_string(next++);
        a.type = sp.span.type;
        a.fragments = {{s.tokens[sp.span.begin].start, s.tokens[sp.span.end - 1].end}};
        a.surface = p.surface_of(a.fragments);
        p.add_span(std::move(a));
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

eval::EvalReport evaluate_concepts(const tagger::TaggerModel& model,
                                   const std::vector<corpus::AnnotatedDocument>& docs, eval::MatchMode mode,
                                   const corpus::Schema& schema) {
  eval::MatchOptions options;
  options.mode = mode;
  return eval::prf_scores(eval::match_documents(docs, predict_concepts(model, docs), options),
                          schema.concept_names());
}

double evaluate_pos(const tagger::TaggerModel& model, const std::vector<corpus::AnnotatedDocument>& docs) {
  std::vector<std::string> gold, pred;
  for (const auto& d : docs) {
    auto state = model.fresh_state();
    for (const auto& s : d.sentences) {
      std::vector<std::string> words;
      for (const auto& t : s.tokens) {
        if (t.pos.empty()) throw Error("document " + d.doc_id + " has tokens without gold POS");
        words.push_back(d.substring_utf8(t.start, t.end));
        gold.push_back(t.pos);
      }
      const auto labels = model.predict_labels(words, state);
      pred.insert(pred.end(), labels.begin(), labels.end());
    }
  }
  return eval::token_accuracy(gold, pred);
}

eval::EvalReport evaluate_relations(const relation::RelationModel& model,
                                    const std::vector<corpus::AnnotatedDocument>& docs,
                                    const relation::CandidatePolicy& policy, const corpus::Schema& schema) {
  auto p = policy;
  p.negative_ratio = 1.0;
  const auto cs = relation::corpus_candidates(docs, p, schema);
  std::vector<std::string> gold;
  for (const auto& c : cs) gold.push_back(c.label);
  return eval::prf_scores(relation::candidate_counts(gold, relation::classify(model, cs)), schema.relation_names());
}

eval::EvalReport evaluate_relation_pipeline(const tagger::TaggerModel& concepts,
                                            const relation::RelationModel& relations,
                                            const std::vector<corpus::AnnotatedDocument>& docs,
                                            const relation::CandidatePolicy& policy, const corpus::Schema& schema,
                                            double threshold) {
  std::vector<eval::RelationTriple> gold, pred;
  for (const auto& d : docs) {
    for (auto& t : eval::relation_triples(d)) gold.push_back(std::move(t));
    corpus::AnnotatedDocument p = d;
    p.spans.clear();
    p.relations.clear();
    p.attributes.clear();
    p.prune_order();
    auto state = concepts.fresh_state();
    std::size_t next_span = 1, next_rel = 1;
    for (const auto& s : d.sentences) {
      std::vector<std::string> words;
      for (const auto& t : s.tokens) words.push_back(d.substring_utf8(t.start, t.end));
      std::vector<corpus::TokenSpan> spans;
      std::vector<std::string> ids;
      for (const auto& sp : concepts.predict_spans(words, state)) {
        corpus::SpanAnnotation a;
        a.id = "T" + std::to_string(next_span++);
        a.type = sp.span.type;
        a.fragments = {{s.tokens[sp.span.begin].start, s.tokens[sp.span.end - 1].end}};
        a.surface = p.surface_of(a.fragments);
        ids.push_back(a.id);
        spans.push_back(sp.span);
        p.add_span(std::move(a));
      }
      for (const auto& r : relation::predict_relations(relations, words, spans, policy, schema, threshold)) {
        p.add_relation({"R" + std::to_string(next_rel++), r.relation, ids[r.arg1], ids[r.arg2], ""});
      }
    }
    for (auto& t : eval::relation_triples(p)) pred.push_back(std::move(t));
  }
  return eval::prf_scores(eval::evaluate_relations(gold, pred), schema.relation_names());
}

}  // namespace mex::workbench
