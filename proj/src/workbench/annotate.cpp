#include "mex/workbench/annotate.hpp"

#include <algorithm>
#include <map>

#include "mex/core/error.hpp"
#include "mex/core/utf8.hpp"

namespace mex::workbench {

nlohmann::ordered_json AnnotationResult::to_json() const {
  nlohmann::ordered_json j;
  j["text"] = text;
  j["sentences"] = nlohmann::ordered_json::array();
  for (const auto& s : sentences) {
    nlohmann::ordered_json js;
    js["start"] = s.start;
    js["end"] = s.end;
    js["tokens"] = nlohmann::ordered_json::array();
    for (const auto& t : s.tokens) {
      nlohmann::ordered_json jt;
      jt["start"] = t.start;
      jt["end"] = t.end;
      jt["text"] = t.text;
      jt["pos"] = t.pos;
      js["tokens"].push_back(std::move(jt));
    }
    j["sentences"].push_back(std::move(js));
  }
  j["concepts"] = nlohmann::ordered_json::array();
  for (const auto& c : concepts) {
    nlohmann::ordered_json jc;
    jc["id"] = c.id;
    jc["type"] = c.type;
    jc["start"] = c.start;
    jc["end"] = c.end;
    jc["text"] = c.text;
    jc["confidence"] = c.confidence;
    j["concepts"].push_back(std::move(jc));
  }
  j["relations"] = nlohmann::ordered_json::array();
  for (const auto& r : relations) {
    nlohmann::ordered_json jr;
    jr["id"] = r.id;
    jr["type"] = r.type;
    jr["arg1"] = r.arg1;
    jr["arg2"] = r.arg2;
    jr["confidence"] = r.confidence;
    j["relations"].push_back(std::move(jr));
  }
  return j;
}

AnnotationResult AnnotationResult::from_json(const nlohmann::json& j) {
  AnnotationResult r;
  try {
    r.text = j.at("text").get<std::string>();
    const auto length = utf8::decode(r.text).size();
    auto range = [&](std::size_t start, std::size_t end) {
      if (start > end || end > length) throw FormatError("offsets outside the text");
    };
    for (const auto& js : j.at("sentences")) {
      SentenceResult s{js.at("start").get<std::size_t>(), js.at("end").get<std::size_t>(), {}};
      range(s.start, s.end);
      for (const auto& jt : js.at("tokens")) {
        TokenResult t{jt.at("start").get<std::size_t>(), jt.at("end").get<std::size_t>(),
                      jt.at("text").get<std::string>(), jt.at("pos").get<std::string>()};
        range(t.start, t.end);
        s.tokens.push_back(std::move(t));
      }
      r.sentences.push_back(std::move(s));
    }
    std::map<std::string, bool> ids;
    for (const auto& jc : j.at("concepts")) {
      ConceptResult c{jc.at("id").get<std::string>(),        jc.at("type").get<std::string>(),
                      jc.at("start").get<std::size_t>(),     jc.at("end").get<std::size_t>(),
                      jc.at("text").get<std::string>(),      jc.at("confidence").get<double>()};
      range(c.start, c.end);
      ids[c.id] = true;
      r.concepts.push_back(std::move(c));
    }
    for (const auto& jr : j.at("relations")) {
      RelationResult rel{jr.at("id").get<std::string>(), jr.at("type").get<std::string>(),
                         jr.at("arg1").get<std::string>(), jr.at("arg2").get<std::string>(),
                         jr.at("confidence").get<double>()};
      if (!ids.count(rel.arg1) || !ids.count(rel.arg2)) {
        throw FormatError("relation " + rel.id + " references an unknown concept");
      }
      r.relations.push_back(std::move(rel));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad annotation result: ") + e.what());
  }
  return r;
}

corpus::AnnotatedDocument AnnotationResult::to_document(const std::string& doc_id) const {
  corpus::AnnotatedDocument doc;
  doc.doc_id = doc_id;
  doc.text = utf8::decode(text);
  doc.final_newline = false;
  for (const auto& s : sentences) {
    corpus::Sentence sent{s.start, s.end, {}};
    for (const auto& t : s.tokens) sent.tokens.push_back({t.start, t.end, t.pos});
    doc.sentences.push_back(std::move(sent));
  }
  for (const auto& c : concepts) {
    corpus::SpanAnnotation a;
    a.id = c.id;
    a.type = c.type;
    a.fragments = {{c.start, c.end}};
    a.surface = doc.surface_of(a.fragments);
    doc.add_span(std::move(a));
  }
  for (const auto& r : relations) doc.add_relation({r.id, r.type, r.arg1, r.arg2, ""});
  return doc;
}

std::string result_json(const AnnotationResult& r) { return r.to_json().dump() + "\n"; }

namespace {

void require_stage(bool present, const char* stage, const char* what) {
  if (!present) throw Error(std::string("bundle has no ") + what + "; the '" + stage + "' stage cannot run");
}

}  // namespace

AnnotationResult annotate(const ModelBundle& bundle, std::string_view text, const AnnotateOptions& options) {
  require_stage(bundle.pos != nullptr, "pos", "POS tagger");
  require_stage(bundle.concepts != nullptr, "concepts", "concept tagger");
  require_stage(bundle.relations != nullptr, "relations", "relation model");
  if (!utf8::is_valid(text)) throw Error("input text is not valid UTF-8");

  AnnotationResult out;
  out.text = std::string(text);
  const auto cps = utf8::decode(text);
  const corpus::Tokenizer tokenizer(bundle.tokenizer);
  auto pos_state = bundle.pos->fresh_state();
  auto concept_state = bundle.concepts->fresh_state();
  std::size_t next_t = 1, next_r = 1;
  for (const auto& sent : tokenizer.split(cps)) {
    std::vector<std::string> words;
    for (const auto& t : sent.tokens) words.push_back(utf8::encode(std::u32string_view(cps).substr(t.start, t.end - t.start)));
    const auto tags = bundle.pos->predict_labels(words, pos_state);
    SentenceResult s{sent.start, sent.end, {}};
    for (std::size_t i = 0; i < words.size(); ++i) {
      s.tokens.push_back({sent.tokens[i].start, sent.tokens[i].end, words[i], tags[i]});
    }

    const auto predicted = bundle.concepts->predict_spans(words, concept_state);
    std::vector<corpus::TokenSpan> spans;
    std::vector<std::string> ids;
    for (const auto& p : predicted) {
      ConceptResult c;
      c.id = "T" + std::to_string(next_t++);
      c.type = p.span.type;
      c.start = sent.tokens[p.span.begin].start;
      c.end = sent.tokens[p.span.end - 1].end;
      c.text = utf8::encode(std::u32string_view(cps).substr(c.start, c.end - c.start));
      c.confidence = std::clamp(p.confidence, 0.0, 1.0);
      spans.push_back(p.span);
      ids.push_back(c.id);
      out.concepts.push_back(std::move(c));
    }
    for (const auto& r : relation::predict_relations(*bundle.relations, words, spans, options.candidates,
                                                     bundle.schema, options.relation_threshold)) {
      out.relations.push_back({"R" + std::to_string(next_r++), r.relation, ids[r.arg1], ids[r.arg2],
                               std::clamp(r.confidence, 0.0, 1.0)});
    }
    out.sentences.push_back(std::move(s));
  }
  return out;
}

}  // namespace mex::workbench
