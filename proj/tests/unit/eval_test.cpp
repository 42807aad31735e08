#include <set>

#include "doctest.h"
#include "mex/core/error.hpp"
#include "mex/eval/folds.hpp"
#include "mex/eval/iaa.hpp"
#include "mex/eval/metrics.hpp"
#include "mex/eval/report.hpp"
#include "oracles.hpp"

using namespace mex;
using namespace mex::eval;

namespace {

MatchOptions lenient(LenientAlgorithm algo = LenientAlgorithm::kMaximum) {
  MatchOptions o;
  o.mode = MatchMode::kLenient;
  o.algorithm = algo;
  return o;
}

corpus::AnnotatedDocument doc_with(const std::string& id, const std::string& annotator,
                                   std::size_t len,
                                   const std::vector<LabeledSpan>& spans) {
  corpus::AnnotatedDocument d;
  d.doc_id = id;
  d.annotator_id = annotator;
  d.text = std::u32string(len, U'x');
  int k = 1;
  for (const auto& s : spans) {
    d.add_span({"T" + std::to_string(k++), s.type, {{s.start, s.end}}, std::string(s.end - s.start, 'x')});
  }
  return d;
}

}  // namespace

TEST_CASE("match_spans: identical sets score 1") {
  const std::vector<LabeledSpan> g{{0, 5, "A"}, {6, 9, "B"}, {10, 12, "A"}};
  for (const auto mode : {MatchMode::kStrict, MatchMode::kLenient}) {
    const auto c = match_spans(g, g, mode).micro();
    CHECK(c.fp == 0);
    CHECK(c.fn == 0);
    CHECK(scores(c).f1 == 1.0);
  }
}

TEST_CASE("match_spans: boundary mismatch is strict miss, lenient hit") {
  const std::vector<LabeledSpan> g{{0, 10, "Medication"}}, p{{0, 12, "Medication"}};
  const auto strict = match_spans(g, p, MatchMode::kStrict).micro();
  CHECK(strict == ClassCounts{0, 1, 1});
  CHECK(match_spans(g, p, MatchMode::kLenient).micro().tp == 1);
}

TEST_CASE("match_spans: type mismatch") {
  const std::vector<LabeledSpan> g{{0, 5, "A"}, {6, 9, "B"}}, p{{0, 5, "A"}, {6, 9, "A"}};
  const auto c = match_spans(g, p, MatchMode::kStrict);
  CHECK(c.micro() == ClassCounts{1, 1, 1});
  const auto r = prf_scores(c);
  CHECK(r.micro.precision == 0.5);
  CHECK(r.micro.recall == 0.5);
  CHECK(r.micro.f1 == 0.5);
}

TEST_CASE("match_spans agrees with brute-force oracle (property)") {
  Rng rng(2024);
  const std::vector<std::string> types{"A", "B", "C"};
  for (int trial = 0; trial < 2000; ++trial) {
    const auto g = oracle::random_spans(rng, 6, 30, types);
    const auto p = oracle::random_spans(rng, 6, 30, types);
    const auto strict = match_spans(g, p, MatchMode::kStrict);
    const auto len = match_spans(g, p, lenient());
    CHECK(oracle::same_counts(oracle::brute_force_match(g, p, false), strict));
    CHECK(oracle::same_counts(oracle::brute_force_match(g, p, true), len));
    CHECK(len.micro().tp >= strict.micro().tp);
    CHECK(len.micro().tp <= std::min(g.size(), p.size()));

    // swapping gold and prediction swaps P and R, keeps F1
    const auto a = prf_scores(len), b = prf_scores(match_spans(p, g, lenient()));
    CHECK(a.micro.precision == doctest::Approx(b.micro.recall));
    CHECK(a.micro.f1 == doctest::Approx(b.micro.f1));
    // identity
    CHECK(prf_scores(match_spans(g, g, lenient())).micro_counts.fp == 0);
  }
}

TEST_CASE("greedy lenient matching can fall short of the maximum") {
  // Greedy takes the largest overlap (g1,p1) first and strands g2 and p2.
  const std::vector<LabeledSpan> g{{0, 10, "A"}, {12, 20, "A"}};
  const std::vector<LabeledSpan> p{{5, 15, "A"}, {0, 3, "A"}};
  CHECK(match_spans(g, p, lenient(LenientAlgorithm::kGreedy)).micro().tp == 1);
  CHECK(match_spans(g, p, lenient(LenientAlgorithm::kMaximum)).micro().tp == 2);

  Rng rng(99);
  std::size_t differ = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const auto gs = oracle::random_spans(rng, 6, 20, {"A"});
    const auto ps = oracle::random_spans(rng, 6, 20, {"A"});
    const auto greedy = match_spans(gs, ps, lenient(LenientAlgorithm::kGreedy)).micro().tp;
    const auto best = match_spans(gs, ps, lenient()).micro().tp;
    CHECK(greedy <= best);
    differ += greedy != best;
  }
  MESSAGE("greedy below maximum on " << differ << " of 2000 random instances");
}

TEST_CASE("lenient matching without type equality") {
  MatchOptions o = lenient();
  o.require_same_type = false;
  const auto c = match_spans({{0, 4, "A"}}, {{2, 6, "B"}}, o);
  CHECK(c.micro().tp == 1);
  CHECK(match_spans({{0, 4, "A"}}, {{2, 6, "B"}}, lenient()).micro().tp == 0);
}

TEST_CASE("prf_scores: hand-counted values") {
  MatchCounts m;
  m.per_class["X"] = {2, 1, 1};
  const auto r = prf_scores(m);
  CHECK(r.micro.precision == doctest::Approx(2.0 / 3));
  CHECK(r.micro.recall == doctest::Approx(2.0 / 3));
  CHECK(r.micro.f1 == doctest::Approx(2.0 / 3));

  MatchCounts zero;
  zero.per_class["X"] = {0, 0, 0};
  const auto z = prf_scores(zero);
  CHECK(z.micro.precision == 0.0);
  CHECK(z.micro.recall == 0.0);
  CHECK(z.micro.f1 == 0.0);

  MatchCounts two;
  two.per_class["A"] = {1, 0, 0};
  two.per_class["B"] = {0, 1, 1};
  CHECK(prf_scores(two).macro.f1 == 0.5);

  // classes without support stay out of the macro mean
  two.per_class["C"] = {0, 3, 0};
  CHECK(prf_scores(two).macro.f1 == 0.5);
  CHECK(prf_scores(two, {"D"}).classes.size() == 4);
}

TEST_CASE("prf_scores: F1 equals 2PR/(P+R) and micro counts are class sums") {
  Rng rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    MatchCounts m;
    for (const char* n : {"a", "b", "c"}) m.per_class[n] = {rng.below(5), rng.below(5), rng.below(5)};
    const auto r = prf_scores(m);
    ClassCounts sum;
    for (const auto& row : r.classes) {
      sum += row.counts;
      const auto& s = row.scores;
      const double expect = s.precision + s.recall > 0
                                ? 2 * s.precision * s.recall / (s.precision + s.recall)
                                : 0.0;
      CHECK(s.f1 == doctest::Approx(expect).epsilon(1e-12));
      CHECK(s.f1 >= 0.0);
      CHECK(s.f1 <= 1.0);
    }
    CHECK(sum == r.micro_counts);
  }
}

TEST_CASE("mean_std uses the population deviation") {
  const auto ms = mean_std({0.8, 0.9, 1.0});
  CHECK(ms.mean == doctest::Approx(0.9));
  CHECK(ms.std == doctest::Approx(std::sqrt(0.02 / 3)));
  MatchCounts a, b;
  a.per_class["X"] = {1, 0, 0};
  b.per_class["X"] = {0, 1, 1};
  const auto cv = summarize_folds({a, b});
  CHECK(cv.micro_f1.mean == 0.5);
  CHECK(cv.micro_f1.std == 0.5);
}

TEST_CASE("token_accuracy") {
  CHECK(token_accuracy({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(token_accuracy({"a", "b", "c", "d"}, {"a", "b", "c", "x"}) == 0.75);
  CHECK(token_accuracy({}, {}) == 1.0);
  CHECK_THROWS_AS(token_accuracy({"a"}, {}), Error);
}

TEST_CASE("char_level_iaa: hand cases") {
  std::map<std::string, std::vector<corpus::AnnotatedDocument>> v;
  v["A"] = {doc_with("d1", "A", 20, {{0, 10, "X"}})};
  v["B"] = {doc_with("d1", "B", 20, {{5, 15, "X"}})};
  auto r = char_level_iaa(v);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.pairs[0].counts == ClassCounts{5, 5, 5});
  CHECK(r.mean_f1 == 0.5);

  v["B"] = v["A"];
  v["B"][0].annotator_id = "B";
  CHECK(char_level_iaa(v).mean_f1 == 1.0);

  v["B"] = {doc_with("d1", "B", 20, {{12, 18, "X"}})};
  CHECK(char_level_iaa(v).mean_f1 == 0.0);

  v["C"] = {doc_with("other", "C", 20, {})};
  r = char_level_iaa(v);
  CHECK(r.pairs.size() == 1);
  CHECK(r.notices.size() == 2);

  std::map<std::string, std::vector<corpus::AnnotatedDocument>> lonely;
  lonely["A"] = v["A"];
  CHECK_THROWS_AS(char_level_iaa(lonely), Error);
}

TEST_CASE("char_level_iaa: matches per-character oracle, symmetric, order-free (property)") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = oracle::random_spans(rng, 5, 25, {"X", "Y"});
    const auto b = oracle::random_spans(rng, 5, 25, {"X", "Y"});
    std::map<std::string, std::vector<corpus::AnnotatedDocument>> v;
    v["A"] = {doc_with("d", "A", 25, a)};
    v["B"] = {doc_with("d", "B", 25, b)};
    const auto r = char_level_iaa(v);
    CHECK(r.mean_f1 == doctest::Approx(oracle::char_f1(25, a, b)).epsilon(1e-12));
    std::map<std::string, std::vector<corpus::AnnotatedDocument>> swapped;
    swapped["A"] = {doc_with("d", "A", 25, b)};
    swapped["B"] = {doc_with("d", "B", 25, a)};
    CHECK(char_level_iaa(swapped).mean_f1 == doctest::Approx(r.mean_f1).epsilon(1e-12));
  }
  // document order does not matter
  std::map<std::string, std::vector<corpus::AnnotatedDocument>> v;
  v["A"] = {doc_with("d1", "A", 10, {{0, 4, "X"}}), doc_with("d2", "A", 10, {{2, 9, "Y"}})};
  v["B"] = {doc_with("d2", "B", 10, {{3, 9, "Y"}}), doc_with("d1", "B", 10, {{1, 4, "X"}})};
  const auto first = char_level_iaa(v).mean_f1;
  std::swap(v["A"][0], v["A"][1]);
  CHECK(char_level_iaa(v).mean_f1 == first);
}

TEST_CASE("char_level_iaa: relations project onto argument characters") {
  auto a = doc_with("d", "A", 10, {{0, 2, "X"}, {4, 5, "Y"}});
  auto b = doc_with("d", "B", 10, {{0, 2, "X"}, {4, 6, "Y"}});
  a.add_relation({"R1", "Rel", "T1", "T2", ""});
  b.add_relation({"R1", "Rel", "T1", "T2", ""});
  const auto c = char_level_counts(a, b, IaaTarget::kRelations);
  // a: 2x1 cells, b: 2x2 cells
  CHECK(c == ClassCounts{2, 2, 0});
}

TEST_CASE("make_folds: ratios, disjointness, determinism") {
  std::vector<std::string> ids;
  for (int i = 0; i < 100; ++i) ids.push_back("doc" + std::to_string(i));
  const auto plan = make_folds(ids, 5, {0.75, 0.10, 0.15}, 42);
  REQUIRE(plan.folds.size() == 5);
  for (const auto& f : plan.folds) {
    CHECK(f.train.size() == 75);
    CHECK(f.dev.size() == 10);
    CHECK(f.test.size() == 15);
    std::set<std::string> all(f.train.begin(), f.train.end());
    all.insert(f.dev.begin(), f.dev.end());
    all.insert(f.test.begin(), f.test.end());
    CHECK(all.size() == 100);
  }
  CHECK(plan.folds[0].test != plan.folds[1].test);

  auto shuffled = ids;
  Rng(3).shuffle(shuffled);
  const auto again = make_folds(shuffled, 5, {0.75, 0.10, 0.15}, 42);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(again.folds[i].train == plan.folds[i].train);
    CHECK(again.folds[i].dev == plan.folds[i].dev);
    CHECK(again.folds[i].test == plan.folds[i].test);
  }

  const auto one = make_folds(ids, 1, {1.0, 0.0, 0.0}, 0);
  CHECK(one.folds[0].train.size() == 100);
  CHECK(one.folds[0].dev.empty());
  CHECK(one.folds[0].test.empty());

  CHECK_THROWS_AS(make_folds(ids, 5, {0.7, 0.1, 0.1}, 0), Error);
  CHECK_THROWS_AS(make_folds({"a", "b"}, 5), Error);
}

TEST_CASE("make_folds: sizes within one document of target (property)") {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 10 + rng.below(300);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back(std::to_string(i));
    const auto plan = make_folds(ids, 3, {0.75, 0.10, 0.15}, trial);
    for (const auto& f : plan.folds) {
      CHECK(std::abs(static_cast<double>(f.train.size()) - 0.75 * n) <= 1.0);
      CHECK(std::abs(static_cast<double>(f.dev.size()) - 0.10 * n) <= 1.0);
      CHECK(std::abs(static_cast<double>(f.test.size()) - 0.15 * n) <= 1.0);
    }
  }
}

TEST_CASE("evaluate_relations") {
  const std::vector<RelationTriple> gold{{"d", {0, 7}, {8, 12}, "Has_dosing"},
                                         {"d", {20, 24}, {25, 30}, "Shows"}};
  CHECK(prf_scores(evaluate_relations(gold, gold)).micro.f1 == 1.0);

  auto pred = gold;
  pred[0].type = kNoRelation;
  const auto c = evaluate_relations(gold, pred);
  CHECK(c.per_class.at("Has_dosing") == ClassCounts{0, 0, 1});
  CHECK(c.per_class.count(kNoRelation) == 0);

  pred.push_back({"d", {8, 12}, {0, 7}, kNoRelation});
  CHECK(evaluate_relations(gold, pred).micro() == ClassCounts{1, 0, 1});

  const auto& names = std::vector<std::string>{"Has_state", "Has_dosing", "Has_time_info",
                                               "Has_measure", "Is_located", "Is_specified",
                                               "Shows", "Examines", "Involves"};
  const auto report = prf_scores(evaluate_relations(gold, pred), names);
  CHECK(report.classes.size() == 9);
}

TEST_CASE("report rendering") {
  MatchCounts m;
  m.per_class["Medication"] = {8, 2, 1};
  m.per_class["Dosing"] = {3, 0, 3};
  const auto r = prf_scores(m);
  const auto table = format_table(r, "concepts");
  CHECK(table.find("Medication") != std::string::npos);
  CHECK(table.find("micro") != std::string::npos);
  const auto j = to_json(r);
  CHECK(j["classes"].size() == 2);
  CHECK(j["classes"][0]["name"] == "Dosing");
  CHECK(j["classes"][1]["support"] == 9);
}
