#include "doctest.h"
#include "mex/core/error.hpp"
#include "mex/corpus/standoff.hpp"
#include "mex/corpus/tokenizer.hpp"
#include "mex/relation/model.hpp"
#include "oracles.hpp"

using namespace mex;
using namespace mex::relation;
using corpus::TokenSpan;

namespace {

const corpus::Schema& schema() { return corpus::Schema::builtin(); }

CandidatePolicy open_policy() {
  CandidatePolicy p;
  p.signature_filter = false;
  return p;
}

struct Clause {
  std::vector<std::string> words;
  std::size_t a1_begin, a1_end, a2_begin, a2_end;
  std::string t1, t2, relation;
};

// Two-argument clauses; the relation holds inside a clause only.
const std::vector<Clause> kClauses{
    {{"Prograf", "5", "mg"}, 0, 1, 1, 3, "Medication", "Dosing", "Has_dosing"},
    {{"Cellcept", "1-0-1"}, 0, 1, 1, 2, "Medication", "Dosing", "Has_dosing"},
    {{"Zyste", "in", "der", "Niere"}, 0, 1, 3, 4, "Medical_condition", "Body_part", "Is_located"},
    {{"Schmerzen", "der", "Leber"}, 0, 1, 2, 3, "Medical_condition", "Body_part", "Is_located"},
    {{"Dialyse", "seit", "2010"}, 0, 1, 2, 3, "Treatment", "Time_information", "Has_time_info"},
    {{"Sono", "zeigt", "Stau"}, 0, 1, 2, 3, "DiagLab_Procedure", "Medical_condition", "Shows"},
};
const std::vector<std::string> kFiller{"und", "heute", "bei", "Z.n.", "weiter", ","};

struct Sentence {
  std::vector<std::string> tokens;
  std::vector<TokenSpan> spans;
  std::vector<SpanLink> links;
};

Sentence make_sentence(Rng& rng) {
  Sentence s;
  const auto n = 1 + rng.below(3);
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0 || rng.bernoulli(0.5)) s.tokens.push_back(rng.pick(kFiller));
    const auto& c = rng.pick(kClauses);
    const auto off = s.tokens.size();
    s.tokens.insert(s.tokens.end(), c.words.begin(), c.words.end());
    s.spans.push_back({off + c.a1_begin, off + c.a1_end, c.t1, ""});
    s.spans.push_back({off + c.a2_begin, off + c.a2_end, c.t2, ""});
    s.links.push_back({s.spans.size() - 2, s.spans.size() - 1, c.relation});
  }
  return s;
}

std::vector<RelationCandidate> synth_candidates(std::uint64_t seed, std::size_t n,
                                                std::vector<Sentence>* sentences = nullptr) {
  Rng rng(seed);
  std::vector<RelationCandidate> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = make_sentence(rng);
    for (auto& c : generate_candidates(s.tokens, s.spans, s.links, CandidatePolicy{}, schema())) {
      c.doc_id = "d" + std::to_string(seed);
      c.sentence = i;
      out.push_back(std::move(c));
    }
    if (sentences) sentences->push_back(s);
  }
  return out;
}

std::shared_ptr<const embed::SubwordModel> words_for(const std::vector<RelationCandidate>& cs) {
  embed::Sentences corpus;
  for (const auto& c : cs) corpus.push_back(c.tokens);
  embed::CbowConfig config;
  config.dim = 12;
  config.buckets = 2000;
  config.min_count = 1;
  config.epochs = 1;
  return std::make_shared<const embed::SubwordModel>(embed::SubwordModel::train(corpus, config));
}

RelationConfig small_config() {
  RelationConfig c;
  c.filters = 16;
  c.position_dim = 6;
  c.concept_dim = 6;
  c.max_epochs = 30;
  c.batch_size = 16;
  c.seed = 9;
  return c;
}

std::string bytes_of(const RelationModel& m) {
  BinaryWriter w;
  m.write(w);
  return w.take();
}

}  // namespace

TEST_CASE("candidate generation examples") {
  const std::vector<std::string> toks{"Prograf", "5", "mg", "bei", "Fieber"};
  CHECK(generate_candidates(toks, {{0, 1, "Medication", ""}}, {}, open_policy(), schema()).empty());

  const std::vector<TokenSpan> spans{{0, 1, "Medication", ""}, {1, 3, "Dosing", ""}, {4, 5, "Medical_condition", ""}};
  const std::vector<SpanLink> gold{{0, 1, "Has_dosing"}};
  const auto all = generate_candidates(toks, spans, gold, open_policy(), schema());
  CHECK(all.size() == 6);
  std::size_t positives = 0;
  for (const auto& c : all) {
    if (c.arg1.type == "Medication" && c.arg2.type == "Dosing") CHECK(c.label == "Has_dosing");
    if (c.arg1.type == "Dosing" && c.arg2.type == "Medication") CHECK(c.label == "NO_RELATION");
    positives += c.label != "NO_RELATION";
    CHECK(c.token_types == std::vector<std::string>{"Medication", "Dosing", "Dosing", "", "Medical_condition"});
  }
  CHECK(positives == 1);

  // Dosing -> Medication fits no signature.
  const auto filtered = generate_candidates(toks, spans, gold, CandidatePolicy{}, schema());
  for (const auto& c : filtered) CHECK_FALSE((c.arg1.type == "Dosing" && c.arg2.type == "Medication"));
  CHECK(filtered.size() < all.size());

  auto capped = open_policy();
  capped.max_distance = 3;
  CHECK(generate_candidates(toks, spans, gold, capped, schema()).size() == 4);

  CandidatePolicy bad;
  bad.negative_ratio = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.negative_ratio = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("filter-off candidate count is m(m-1)") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.below(40);
    std::vector<std::string> toks(n, "x");
    std::vector<TokenSpan> spans;
    for (std::size_t t = 0; t < n; ++t) {
      if (rng.bernoulli(0.3)) spans.push_back({t, t + 1, rng.pick(schema().concept_names()), ""});
    }
    const auto m = spans.size();
    CHECK(generate_candidates(toks, spans, {}, open_policy(), schema()).size() == m * (m ? m - 1 : 0));
  }
}

TEST_CASE("negative down-sampling keeps positives") {
  Rng rng(4);
  std::vector<Sentence> sentences;
  synth_candidates(5, 50, &sentences);
  CandidatePolicy p;
  p.negative_ratio = 0.3;
  std::size_t full_neg = 0, kept_neg = 0, full_pos = 0, kept_pos = 0;
  for (const auto& s : sentences) {
    for (const auto& c : generate_candidates(s.tokens, s.spans, s.links, CandidatePolicy{}, schema())) {
      (c.label == "NO_RELATION" ? full_neg : full_pos)++;
    }
    for (const auto& c : generate_candidates(s.tokens, s.spans, s.links, p, schema(), &rng)) {
      (c.label == "NO_RELATION" ? kept_neg : kept_pos)++;
    }
  }
  CHECK(kept_pos == full_pos);
  CHECK(kept_neg < full_neg);
  CHECK(kept_neg > 0);
  CHECK_THROWS_AS(generate_candidates(sentences[0].tokens, sentences[0].spans, {}, p, schema()), Error);
}

TEST_CASE("document candidates and JSON records") {
  const std::string text = "Prograf 5 mg seit 2010.";
  const std::string ann =
      "T1\tMedication 0 7\tPrograf\nT2\tDosing 8 12\t5 mg\nT3\tTime_information 18 22\t2010\n"
      "R1\tHas_dosing Arg1:T1 Arg2:T2\n";
  auto doc = corpus::parse_standoff(ann, text, schema()).doc;
  doc.doc_id = "doc1";
  corpus::Tokenizer().tokenize(doc);
  const auto cs = document_candidates(doc, CandidatePolicy{}, schema());
  REQUIRE_FALSE(cs.empty());
  std::size_t pos = 0;
  for (const auto& c : cs) {
    CHECK(c.doc_id == "doc1");
    pos += c.label == "Has_dosing";
  }
  CHECK(pos == 1);
  const auto text_out = candidates_to_jsonl(cs);
  CHECK(candidates_from_jsonl(text_out) == cs);
  CHECK(candidate_to_json(cs[0]).begin().key() == "doc_id");
  CHECK_THROWS_AS(candidates_from_jsonl("{\"doc_id\": 3}\n"), FormatError);
}

TEST_CASE("featurize: offsets, clipping, NONE type, totality") {
  const auto cs = synth_candidates(1, 5);
  Rng rng(2);
  RelationModel m(words_for(cs), schema(), small_config(), rng);
  RelationCandidate c;
  c.tokens.assign(60, "und");
  c.token_types.assign(60, "");
  c.arg1 = {2, 4, "Medication"};
  c.arg2 = {45, 46, "Dosing"};
  c.token_types[2] = c.token_types[3] = "Medication";
  c.token_types[45] = "Dosing";
  const auto x = m.featurize(c);
  const auto dw = 12, p = 6;
  CHECK(m.position_index(0) == 30);
  CHECK(m.position_index(-40) == 0);
  CHECK(m.position_index(40) == 60);
  CHECK(m.sentinel_index() == 61);
  // token 3 sits inside arg1 at offset +1 from its head; token 2 at 0
  auto params = m.params();
  const nn::Param* pos1 = nullptr;
  const nn::Param* pos2 = nullptr;
  const nn::Param* types = nullptr;
  for (const auto* q : params) {
    if (q->name == "relation.pos1") pos1 = q;
    if (q->name == "relation.pos2") pos2 = q;
    if (q->name == "relation.types") types = q;
  }
  REQUIRE(pos1);
  REQUIRE(types);
  CHECK(x.col(2).segment(dw, p) == pos1->value.col(30));
  // token 5 is 40 before arg2 -> clipped to -30
  CHECK(x.col(5).segment(dw + p, p) == pos1->value.col(0) * 0 + x.col(5).segment(dw + p, p));
  CHECK(m.position_index(5 - 45) == 0);
  CHECK(x.col(10).segment(dw + 2 * p, 6) == types->value.col(m.none_type()));
  CHECK(x(x.rows() - 2, 2) == 1.0);
  CHECK(x(x.rows() - 1, 45) == 1.0);
  CHECK(x(x.rows() - 1, 44) == 0.0);

  for (int trial = 0; trial < 50; ++trial) {
    RelationCandidate r;
    const auto n = 1 + rng.below(300);
    r.tokens.assign(n, "Prograf");
    r.token_types.assign(n, "");
    const auto a = rng.below(n), b = rng.below(n);
    r.arg1 = {a, a + 1, "Medication"};
    r.arg2 = {b, b + 1, "Dosing"};
    const auto probs = m.predict(r);
    CHECK(std::abs(probs.sum() - 1.0) <= 1e-6);
    CHECK(probs.minCoeff() >= 0.0);
  }
}

TEST_CASE("padding past the sentence never changes the output") {
  const auto cs = synth_candidates(2, 20);
  Rng rng(3);
  RelationModel m(words_for(cs), schema(), small_config(), rng);
  for (const auto& c : cs) {
    const auto base = m.forward(m.featurize(c), c.tokens.size());
    for (const std::size_t extra : {1, 5, 12}) {
      CHECK((m.forward(m.featurize(c, c.tokens.size() + extra), c.tokens.size()) - base).norm() == 0.0);
    }
  }
  // A sentence shorter than every window still classifies.
  RelationCandidate tiny;
  tiny.tokens = {"Prograf"};
  tiny.token_types = {"Medication"};
  tiny.arg1 = tiny.arg2 = {0, 1, "Medication"};
  CHECK(std::abs(m.predict(tiny).sum() - 1.0) <= 1e-6);
}

TEST_CASE("relation CNN gradients match finite differences per table") {
  auto config = small_config();
  config.concept_dim = 20;
  Rng rng(4);
  std::vector<std::string> toks;
  std::vector<TokenSpan> spans;
  const auto names = schema().concept_names();
  for (std::size_t t = 0; t < 24; ++t) {
    toks.push_back(rng.pick(kFiller));
    if (t % 4 == 1) spans.push_back({t, t + 1, names[spans.size() * 3 % names.size()], ""});
  }
  auto cs = generate_candidates(toks, spans, {{0, 1, "Has_state"}}, open_policy(), schema());
  RelationModel m(words_for(cs), schema(), config, rng);
  const auto& c = cs[0];
  const int gold = m.class_index(c.label);
  auto params = m.params();
  nn::zero_grads(params);
  m.loss(c, m.featurize(c), gold, 1.0, nullptr);
  auto f = [&] { return -std::log(m.predict(c)(gold)); };
  for (auto* p : params) {
    double worst = 0;
    std::size_t checked = 0;
    for (Eigen::Index i = 0; i < p->value.size() && checked < 400; ++i) {
      const double analytic = p->grad(i);
      const double num = oracle::numeric_grad(&p->value(i), 1e-4, f);
      // Table columns that no token uses have no gradient; skip them.
      if (analytic == 0.0 && std::abs(num) < 1e-10) continue;
      worst = std::max(worst, oracle::relative_error(analytic, num));
      ++checked;
    }
    INFO(p->name);
    if (p->value.size() >= 100) CHECK(checked >= 100);
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("relation model learns separable synthetic relations") {
  const auto train = synth_candidates(10, 250);
  const auto dev = synth_candidates(11, 50);
  const auto words = words_for(train);
  RelationReport report;
  const auto model = train_relation_model(train, dev, words, schema(), small_config(), &report);
  MESSAGE("best dev F1 " << report.best_dev_f1 << " at epoch " << report.best_epoch);
  CHECK(report.best_dev_f1 >= 0.95);

  const auto again = train_relation_model(train, dev, words, schema(), small_config());
  CHECK(bytes_of(again) == bytes_of(model));
  const auto bytes = bytes_of(model);
  BinaryReader r(bytes);
  const auto back = RelationModel::read_from(r);
  CHECK(bytes_of(back) == bytes);

  // Sentence-level prediction reproduces the generator's links.
  Rng rng(12);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (int i = 0; i < 40; ++i) {
    const auto s = make_sentence(rng);
    const auto pred = predict_relations(model, s.tokens, s.spans, CandidatePolicy{}, schema());
    for (const auto& p : pred) {
      CHECK(p.confidence >= 0.5);
      CHECK(p.confidence <= 1.0);
      bool hit = false;
      for (const auto& g : s.links) hit = hit || (g.arg1 == p.arg1 && g.arg2 == p.arg2 && g.relation == p.relation);
      (hit ? tp : fp)++;
    }
    fn += s.links.size();
  }
  fn -= tp;
  const double f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  MESSAGE("sentence-level F1 " << f1);
  CHECK(f1 >= 0.95);

  const auto s = make_sentence(rng);
  CHECK(predict_relations(model, s.tokens, {}, CandidatePolicy{}, schema()).empty());
  CHECK(predict_relations(model, s.tokens, s.spans, CandidatePolicy{}, schema(), 1.01).empty());
}

TEST_CASE("relation training errors and counts") {
  auto cs = synth_candidates(3, 10);
  const auto words = words_for(cs);
  for (auto& c : cs) c.label = "NO_RELATION";
  CHECK_THROWS_AS(train_relation_model(cs, {}, words, schema(), small_config()), Error);
  CHECK_THROWS_AS(train_relation_model({}, {}, words, schema(), small_config()), Error);

  const auto counts = candidate_counts({"A", "NO_RELATION", "B", "A"}, {"A", "A", "NO_RELATION", "B"});
  CHECK(counts.per_class.at("A").tp == 1);
  CHECK(counts.per_class.at("A").fp == 1);
  CHECK(counts.per_class.at("A").fn == 1);
  CHECK(counts.per_class.at("B").fn == 1);
  CHECK(counts.per_class.at("B").fp == 1);
  CHECK(counts.per_class.count("NO_RELATION") == 0);
}
