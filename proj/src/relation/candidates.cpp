#include "mex/relation/candidates.hpp"

#include <map>
#include <sstream>

#include "mex/core/error.hpp"
#include "mex/eval/metrics.hpp"

namespace mex::relation {

void CandidatePolicy::validate() const {
  if (max_distance == 0) throw Error("candidate distance cap must be positive");
  if (!(negative_ratio > 0.0 && negative_ratio <= 1.0)) {
    throw Error("negative down-sampling ratio must be in (0, 1]");
  }
}

namespace {

bool any_signature(const corpus::Schema& schema, const std::string& t1, const std::string& t2) {
  for (const auto& r : schema.relations()) {
    if (schema.signature_allows(r.name, t1, t2)) return true;
  }
  return false;
}

}  // namespace

std::vector<RelationCandidate> generate_candidates(const std::vector<std::string>& tokens,
                                                   const std::vector<corpus::TokenSpan>& spans,
                                                   const std::vector<SpanLink>& gold,
                                                   const CandidatePolicy& policy,
                                                   const corpus::Schema& schema, Rng* rng) {
  policy.validate();
  std::vector<std::string> token_types(tokens.size());
  for (const auto& s : spans) {
    if (s.end > tokens.size() || s.begin >= s.end) throw Error("concept span outside the sentence");
    for (std::size_t t = s.begin; t < s.end; ++t) {
      if (token_types[t].empty()) token_types[t] = s.type;
    }
  }
  std::map<std::pair<std::size_t, std::size_t>, std::string> labels;
  for (const auto& g : gold) labels.emplace(std::pair{g.arg1, g.arg2}, g.relation);

  std::vector<RelationCandidate> out;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    for (std::size_t j = 0; j < spans.size(); ++j) {
      if (i == j) continue;
      const auto& a = spans[i];
      const auto& b = spans[j];
      const auto dist = a.begin > b.begin ? a.begin - b.begin : b.begin - a.begin;
      if (dist > policy.max_distance) continue;
      if (policy.signature_filter && !any_signature(schema, a.type, b.type)) continue;
      const auto it = labels.find({i, j});
      const std::string label = it == labels.end() ? eval::kNoRelation : it->second;
      if (label == eval::kNoRelation && policy.negative_ratio < 1.0) {
        if (!rng) throw Error("down-sampling negatives needs a random generator");
        if (!rng->bernoulli(policy.negative_ratio)) continue;
      }
      RelationCandidate c;
      c.tokens = tokens;
      c.token_types = token_types;
      c.arg1 = {a.begin, a.end, a.type};
      c.arg2 = {b.begin, b.end, b.type};
      c.overlapping = a.begin < b.end && b.begin < a.end;
      c.label = label;
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<RelationCandidate> document_candidates(const corpus::AnnotatedDocument& doc,
                                                   const CandidatePolicy& policy,
                                                   const corpus::Schema& schema, Rng* rng) {
  std::vector<RelationCandidate> out;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const auto& sent = doc.sentences[s];
    std::vector<std::string> tokens;
    for (const auto& t : sent.tokens) tokens.push_back(doc.substring_utf8(t.start, t.end));
    const auto spans = corpus::sentence_token_spans(doc, s, true);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < spans.size(); ++i) by_id[spans[i].id] = i;
    std::vector<SpanLink> gold;
    for (const auto& r : doc.relations) {
      const auto a = by_id.find(r.arg1), b = by_id.find(r.arg2);
      if (a != by_id.end() && b != by_id.end()) gold.push_back({a->second, b->second, r.relation});
    }
    for (auto& c : generate_candidates(tokens, spans, gold, policy, schema, rng)) {
      c.doc_id = doc.doc_id;
      c.sentence = s;
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<RelationCandidate> corpus_candidates(const std::vector<corpus::AnnotatedDocument>& docs,
                                                 const CandidatePolicy& policy,
                                                 const corpus::Schema& schema) {
  Rng rng(policy.seed);
  std::vector<RelationCandidate> out;
  for (const auto& d : docs) {
    auto cs = document_candidates(d, policy, schema, &rng);
    out.insert(out.end(), std::make_move_iterator(cs.begin()), std::make_move_iterator(cs.end()));
  }
  return out;
}

namespace {

nlohmann::ordered_json arg_json(const Argument& a) {
  nlohmann::ordered_json j;
  j["start"] = a.begin;
  j["end"] = a.end;
  j["type"] = a.type;
  return j;
}

Argument arg_from(const nlohmann::json& j) {
  return {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>(), j.at("type").get<std::string>()};
}

}  // namespace

nlohmann::ordered_json candidate_to_json(const RelationCandidate& c) {
  nlohmann::ordered_json j;
  j["doc_id"] = c.doc_id;
  j["sentence"] = c.sentence;
  j["tokens"] = c.tokens;
  j["token_types"] = c.token_types;
  j["arg1"] = arg_json(c.arg1);
  j["arg2"] = arg_json(c.arg2);
  j["overlapping"] = c.overlapping;
  j["label"] = c.label;
  return j;
}

RelationCandidate candidate_from_json(const nlohmann::json& j) {
  try {
    RelationCandidate c;
    c.doc_id = j.at("doc_id").get<std::string>();
    c.sentence = j.at("sentence").get<std::size_t>();
    c.tokens = j.at("tokens").get<std::vector<std::string>>();
    c.token_types = j.at("token_types").get<std::vector<std::string>>();
    c.arg1 = arg_from(j.at("arg1"));
    c.arg2 = arg_from(j.at("arg2"));
    c.overlapping = j.at("overlapping").get<bool>();
    c.label = j.at("label").get<std::string>();
    if (c.token_types.size() != c.tokens.size() || c.arg1.end > c.tokens.size() ||
        c.arg2.end > c.tokens.size() || c.arg1.begin >= c.arg1.end || c.arg2.begin >= c.arg2.end) {
      throw FormatError("candidate record has inconsistent token ranges");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad candidate record: ") + e.what());
  }
}

std::string candidates_to_jsonl(const std::vector<RelationCandidate>& cs) {
  std::string out;
  for (const auto& c : cs) out += candidate_to_json(c).dump() + "\n";
  return out;
}

std::vector<RelationCandidate> candidates_from_jsonl(std::string_view text) {
  std::vector<RelationCandidate> out;
  std::istringstream in{std::string(text)};
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(candidate_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mex::relation
