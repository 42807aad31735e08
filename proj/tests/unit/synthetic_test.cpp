#include <filesystem>

#include "doctest.h"
#include "mex/core/error.hpp"
#include "mex/corpus/corpus_io.hpp"
#include "mex/corpus/standoff.hpp"
#include "mex/eval/iaa.hpp"
#include "mex/workbench/synthetic.hpp"

using namespace mex;
using namespace mex::workbench;

namespace {

const corpus::Schema& schema() { return corpus::Schema::builtin(); }

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mex_synth_" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("builtin inventory covers the schema") {
  const auto& inv = TemplateInventory::builtin();
  CHECK(inv.concept_types().size() >= 12);
  CHECK(inv.relation_types().size() >= 5);
  MESSAGE(inv.concept_types().size() << " concept types, " << inv.relation_types().size() << " relation types");
}

TEST_CASE("inventory errors name the line") {
  const std::string lexicon = "[lexicon]\nmed\tPrograf/NE\n[note]\n";
  CHECK_NOTHROW(TemplateInventory::parse(lexicon + "{Medication:med} ./$.\n", schema()));
  try {
    TemplateInventory::parse(lexicon + "{Drug:med} ./$.\n", schema());
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(std::string(e.what()).find("undeclared concept type 'Drug'") != std::string::npos);
  }
  CHECK_THROWS_AS(TemplateInventory::parse(lexicon + "{Medication:unknown} ./$.\n", schema()), ParseError);
  CHECK_THROWS_AS(TemplateInventory::parse(lexicon + "{Medication:med} {Medication:med}\t1>2:Has_dosing\n", schema()),
                  ParseError);
  CHECK_THROWS_AS(TemplateInventory::parse(lexicon + "{Medication:med}\t1>3:Has_dosing\n", schema()), ParseError);
  CHECK_THROWS_AS(TemplateInventory::parse("[lexicon]\nmed\t1-0-1/CARD\n", schema()), ParseError);
  CHECK_THROWS_AS(TemplateInventory::parse(lexicon, schema()), Error);
}

TEST_CASE("generated corpus: determinism, lengths, gold consistency") {
  SyntheticSpec spec;
  spec.documents = 400;
  spec.seed = 3;
  const auto a = generate_corpus(spec, TemplateInventory::builtin(), schema());
  const auto b = generate_corpus(spec, TemplateInventory::builtin(), schema());
  CHECK(a == b);

  // A prefix of a bigger corpus is the smaller corpus.
  spec.documents = 50;
  const auto prefix = generate_corpus(spec, TemplateInventory::builtin(), schema());
  CHECK(std::equal(prefix.begin(), prefix.end(), a.begin()));

  const auto s = summarize(a);
  REQUIRE(s.notes > 0);
  const double note_mean = static_cast<double>(s.note_tokens) / static_cast<double>(s.notes);
  MESSAGE("notes " << s.notes << " mean " << note_mean << ", summaries " << s.summaries);
  CHECK(note_mean >= 54 * 0.8);
  CHECK(note_mean <= 54 * 1.2);

  for (const auto& d : a) {
    for (const auto& sent : d.sentences) {
      for (const auto& t : sent.tokens) CHECK_FALSE(t.pos.empty());
    }
    // Every document parses back from its standoff files.
    const auto files = corpus::export_standoff(d);
    const auto back = corpus::parse_standoff(files.ann, files.txt, schema());
    CHECK(back.warnings.empty());
    CHECK(back.doc.spans == d.spans);
    CHECK(back.doc.relations == d.relations);
  }
}

TEST_CASE("long letters are near their target length") {
  SyntheticSpec spec;
  spec.documents = 30;
  spec.summary_fraction = 1.0;
  const auto docs = generate_corpus(spec, TemplateInventory::builtin(), schema());
  const auto s = summarize(docs);
  CHECK(s.summaries == 30);
  const double mean = static_cast<double>(s.summary_tokens) / 30.0;
  MESSAGE("summary mean " << mean);
  CHECK(mean >= 938 * 0.8);
  CHECK(mean <= 938 * 1.2);
}

TEST_CASE("noise changes words but keeps annotations valid") {
  SyntheticSpec spec;
  spec.documents = 60;
  const auto clean = generate_corpus(spec, TemplateInventory::builtin(), schema());
  spec.noise_rate = 0.3;
  const auto noisy = generate_corpus(spec, TemplateInventory::builtin(), schema());
  std::size_t differing = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) differing += clean[i].text != noisy[i].text;
  CHECK(differing > 30);
  for (const auto& d : noisy) {
    const auto files = corpus::export_standoff(d);
    CHECK_NOTHROW(corpus::parse_standoff(files.ann, files.txt, schema()));
  }
  spec.noise_rate = 1.5;
  CHECK_THROWS_AS(generate_corpus(spec, TemplateInventory::builtin(), schema()), Error);
}

TEST_CASE("second annotator agreement follows the perturbation rate") {
  SyntheticSpec spec;
  spec.documents = 40;
  const auto docs = generate_corpus(spec, TemplateInventory::builtin(), schema());
  double previous = 1.1;
  for (const double rate : {0.0, 0.2, 0.6}) {
    std::map<std::string, std::vector<corpus::AnnotatedDocument>> versions;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      Rng rng(derive_seed(7, i));
      versions["a"].push_back(docs[i]);
      versions["b"].push_back(perturb_annotations(docs[i], rate, rng, schema(), "b"));
    }
    const auto iaa = eval::char_level_iaa(versions);
    MESSAGE("rate " << rate << " IAA " << iaa.mean_f1);
    if (rate == 0.0) CHECK(iaa.mean_f1 == 1.0);
    CHECK(iaa.mean_f1 < previous);
    previous = iaa.mean_f1;
  }
}

TEST_CASE("written corpus loads back") {
  const auto dir = temp_dir("write");
  SyntheticSpec spec;
  spec.documents = 25;
  const auto s = write_synthetic_corpus(dir.string(), spec, TemplateInventory::builtin(), schema(), true, 0.0);
  CHECK(s.documents == 25);
  const auto loaded = corpus::load_corpus(dir.string(), schema(), corpus::Tokenizer());
  CHECK(loaded.annotators() == std::vector<std::string>{"annotator_a", "annotator_b"});
  const auto docs = generate_corpus(spec, TemplateInventory::builtin(), schema());
  const auto& a = loaded.by_annotator.at("annotator_a");
  REQUIRE(a.size() == 25);
  for (const auto& d : a) {
    const auto it = std::find_if(docs.begin(), docs.end(), [&](const auto& g) { return g.doc_id == d.doc_id; });
    REQUIRE(it != docs.end());
    CHECK(d.sentences == it->sentences);
    CHECK(d.spans == it->spans);
  }
  CHECK(eval::char_level_iaa(loaded.by_annotator).mean_f1 == 1.0);
  std::filesystem::remove_all(dir);
}
