#include <filesystem>
#include <set>

#include "doctest.h"
#include "mex/core/binary_io.hpp"
#include "mex/core/error.hpp"
#include "mex/core/random.hpp"
#include "mex/core/utf8.hpp"
#include "mex/corpus/bioes.hpp"
#include "mex/corpus/conll.hpp"
#include "mex/corpus/normalize.hpp"
#include "mex/corpus/schema.hpp"
#include "mex/corpus/standoff.hpp"
#include "mex/corpus/tokenizer.hpp"

using namespace mex;
using namespace mex::corpus;

namespace {

AnnotatedDocument tokenized(const std::string& text) {
  AnnotatedDocument doc;
  doc.doc_id = "d";
  doc.text = utf8::decode(text);
  Tokenizer().tokenize(doc);
  return doc;
}

SpanAnnotation span(const AnnotatedDocument& doc, std::string id, std::string type,
                    std::size_t start, std::size_t end) {
  SpanAnnotation s{std::move(id), std::move(type), {{start, end}}, {}};
  s.surface = doc.surface_of(s.fragments);
  return s;
}

std::vector<std::string> token_strings(const AnnotatedDocument& doc) {
  std::vector<std::string> out;
  for (const auto& s : doc.sentences) {
    for (const auto& t : s.tokens) out.push_back(doc.substring_utf8(t.start, t.end));
  }
  return out;
}

}  // namespace

TEST_CASE("builtin schema declares 17 concepts, 9 relations, 2 attribute families") {
  const auto& schema = Schema::builtin();
  CHECK(schema.concepts().size() == 17);
  CHECK(schema.relations().size() == 9);
  REQUIRE(schema.attributes().size() == 2);
  CHECK(schema.attribute("DocTime")->values ==
        std::vector<std::string>{"Past", "Future", "Past_present"});
  CHECK(schema.attribute("LevelOfTruth")->values ==
        std::vector<std::string>{"Possible_future", "Negative", "Speculated", "Unlikely"});
  CHECK(schema.signature_allows("Has_dosing", "Medication", "Dosing"));
  CHECK_FALSE(schema.signature_allows("Has_dosing", "Dosing", "Medication"));
  CHECK(schema.signature_allows("Involves", "Treatment", "Medical_device"));
  CHECK(schema.signature_allows("Has_state", "Body_part", "State_of_health"));

  std::size_t central = 0, relating = 0, specifying = 0;
  for (const auto& c : schema.concepts()) {
    central += c.group == ConceptGroup::kCentral;
    relating += c.group == ConceptGroup::kRelating;
    specifying += c.group == ConceptGroup::kSpecifying;
  }
  CHECK(central == 3);
  CHECK(relating == 8);
  CHECK(specifying == 6);

  const auto from_file = Schema::from_file(std::string(MEX_SOURCE_DIR) + "/data/mex_schema.conf");
  CHECK(from_file.fingerprint() == schema.fingerprint());
}

TEST_CASE("schema rejects relation arguments naming undeclared concepts") {
  const char* conf =
      "[entities]\n!Central\n\tA\n[relations]\nR\tArg1:A, Arg2:B\n";
  CHECK_THROWS_AS(Schema::parse(conf), ParseError);
  CHECK_THROWS_AS(Schema::parse("[entities]\nA\n"), ParseError);  // no group
}

TEST_CASE("parse_standoff: one line per concept type") {
  const auto& schema = Schema::builtin();
  std::string text, ann;
  int i = 1;
  for (const auto& c : schema.concepts()) {
    const auto start = utf8::decode(text).size();
    text += "wort" + std::to_string(i) + " ";
    ann += "T" + std::to_string(i) + "\t" + c.name + " " + std::to_string(start) + " " +
           std::to_string(start + 4 + std::to_string(i).size()) + "\twort" + std::to_string(i) +
           "\n";
    ++i;
  }
  const auto result = parse_standoff(ann, text, schema);
  CHECK(result.doc.spans.size() == 17);
  CHECK(result.warnings.empty());
}

TEST_CASE("parse_standoff: empty annotation file") {
  const auto r = parse_standoff("", "Im Sono kein Stau.", Schema::builtin());
  CHECK(r.doc.spans.empty());
  CHECK(r.doc.relations.empty());
  CHECK(r.doc.attributes.empty());
  CHECK(export_standoff(r.doc).ann.empty());
}

TEST_CASE("parse_standoff: single medication span") {
  const auto r = parse_standoff("T1\tMedication 0 7\tPrograf", "Prograf 5 mg", Schema::builtin());
  REQUIRE(r.doc.spans.size() == 1);
  const auto& s = r.doc.spans[0];
  CHECK(s.type == "Medication");
  CHECK(s.fragments == std::vector<Fragment>{{0, 7}});
  CHECK(s.surface == "Prograf");
}

TEST_CASE("parse_standoff: offsets count code points, not bytes") {
  const std::string text = "Übelkeit und Erbrechen";
  const auto r = parse_standoff("T1\tMedical_condition 0 8\tÜbelkeit\n", text, Schema::builtin());
  CHECK(r.doc.spans[0].surface == "Übelkeit");
}

TEST_CASE("parse_standoff: errors carry line numbers") {
  const auto& schema = Schema::builtin();
  const std::string text = "Prograf 5 mg";
  auto line_of = [&](const std::string& ann) -> std::size_t {
    try {
      parse_standoff(ann, text, schema);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  // malformed
  CHECK(line_of("T1\tMedication 0 7\tPrograf\nT2 Dosing 8 12 5 mg\n") == 2);
  // out of range
  CHECK(line_of("T1\tMedication 0 70\tPrograf\n") == 1);
  // surface mismatch
  CHECK(line_of("T1\tMedication 0 7\tPrograd\n") == 1);
  // dangling relation argument
  CHECK(line_of("T1\tMedication 0 7\tPrograf\nR1\tHas_dosing Arg1:T1 Arg2:T9\n") == 2);
  // unknown concept
  CHECK(line_of("T1\tDrug 0 7\tPrograf\n") == 1);
  // duplicate id
  CHECK(line_of("T1\tMedication 0 7\tPrograf\nT1\tDosing 8 12\t5 mg\n") == 2);
  // bad attribute value
  CHECK(line_of("T1\tMedication 0 7\tPrograf\nA1\tDocTime T1 Yesterday\n") == 2);
}

TEST_CASE("parse_standoff: unknown names may be downgraded to warnings") {
  ParseOptions opts;
  opts.unknown_names = UnknownNames::kWarn;
  const auto r = parse_standoff("T1\tDrug 0 7\tPrograf\n", "Prograf 5 mg", Schema::builtin(), opts);
  CHECK(r.doc.spans.size() == 1);
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("parse_standoff: signature violations are warnings") {
  const std::string ann =
      "T1\tMedication 0 7\tPrograf\nT2\tDosing 8 12\t5 mg\nR1\tHas_dosing Arg1:T2 Arg2:T1\n";
  const auto r = parse_standoff(ann, "Prograf 5 mg", Schema::builtin());
  CHECK(r.doc.relations.size() == 1);
  REQUIRE(r.warnings.size() == 1);
  CHECK(r.warnings[0].line == 3);
}

TEST_CASE("export_standoff preserves comments, unknown records and layout") {
  const std::string text = "Prograf 5 mg morgens und abends";
  const std::string ann =
      "# annotator note\n"
      "T1\tMedication 0 7\tPrograf\n"
      "T2\tDosing 8 12;13 20\t5 mg morgens\n"
      "E1\tSomething:T1\n"
      "R1\tHas_dosing Arg1:T1 Arg2:T2\t\n"
      "A1\tDocTime T1 Past_present\n"
      "#1\tAnnotatorNotes T1\tTacrolimus";
  const auto r = parse_standoff(ann, text, Schema::builtin());
  CHECK(r.doc.spans[1].discontinuous());
  const auto out = export_standoff(r.doc);
  CHECK(out.ann == ann);
  CHECK(out.txt == text);
}

TEST_CASE("tokenize: short clinical sentence") {
  const auto doc = tokenized("Im Sono kein Stau.");
  REQUIRE(doc.sentences.size() == 1);
  CHECK(doc.sentences[0].tokens.size() == 5);
  CHECK(token_strings(doc) == std::vector<std::string>{"Im", "Sono", "kein", "Stau", "."});
}

TEST_CASE("tokenize: empty text") {
  CHECK(Tokenizer().split(U"").empty());
}

TEST_CASE("tokenize: abbreviations and dates do not end sentences") {
  const auto doc = tokenized("Krea 1,2 mg/dl. Ggf. Kontrolle am 11.01.2018.");
  REQUIRE(doc.sentences.size() == 2);
  CHECK(doc.substring_utf8(doc.sentences[0].start, doc.sentences[0].end) == "Krea 1,2 mg/dl.");
  CHECK(doc.substring_utf8(doc.sentences[1].start, doc.sentences[1].end) ==
        "Ggf. Kontrolle am 11.01.2018.");
}

TEST_CASE("tokenize: more sentence boundary rules") {
  CHECK(tokenized("Z.n. NTX. Pat. stabil").sentences.size() == 2);
  CHECK(tokenized("Kein Fieber\nRR 120/80").sentences.size() == 2);
  CHECK(tokenized("Schmerzen?! Nein.").sentences.size() == 2);
  CHECK(tokenized("Kontrolle am 11.01. 2018 geplant.").sentences.size() == 1);
  CHECK(tokenized("Er sagte \"gut.\" Dann nichts.").sentences.size() == 2);
  CHECK(tokenized("z.B. Prograf").sentences.size() == 1);
  const auto doc = tokenized("Niereninsuffizienz, terminale.");
  CHECK(token_strings(doc) == std::vector<std::string>{"Niereninsuffizienz", ",", "terminale", "."});
}

TEST_CASE("tokenize: offsets reconstruct the text (property)") {
  Rng rng(7);
  const std::u32string alphabet = U"abcÄöüß 0123456789.,;:!?-/()\n\t ";
  for (int trial = 0; trial < 300; ++trial) {
    std::u32string text;
    const auto len = rng.below(60);
    for (std::size_t i = 0; i < len; ++i) text.push_back(alphabet[rng.below(alphabet.size())]);
    const auto sentences = Tokenizer().split(text);
    std::u32string rebuilt;
    std::size_t pos = 0, prev_end = 0;
    for (const auto& s : sentences) {
      CHECK(s.start >= prev_end);
      CHECK(s.start == s.tokens.front().start);
      CHECK(s.end == s.tokens.back().end);
      prev_end = s.end;
      for (const auto& t : s.tokens) {
        REQUIRE(t.start >= pos);
        for (std::size_t p = pos; p < t.start; ++p) CHECK(utf8::is_space(text[p]));
        rebuilt += text.substr(pos, t.end - pos);
        pos = t.end;
        // maximal alnum run or single punctuation
        if (utf8::is_alnum(text[t.start])) {
          CHECK((t.end == text.size() || !utf8::is_alnum(text[t.end])));
          CHECK((t.start == 0 || !utf8::is_alnum(text[t.start - 1])));
        } else {
          CHECK(t.end - t.start == 1);
        }
      }
    }
    for (std::size_t p = pos; p < text.size(); ++p) CHECK(utf8::is_space(text[p]));
    rebuilt += text.substr(pos);
    CHECK(rebuilt == text);
  }
}

TEST_CASE("normalize: nested spans keep only the longest") {
  auto doc = tokenized("aaaa bbbb cccc dddd e");  // 21 chars
  doc.add_span(span(doc, "T1", "Treatment", 0, 20));
  doc.add_span(span(doc, "T2", "Medication", 5, 10));
  const auto r = normalize_document(doc, {}, {});
  REQUIRE(r.doc.spans.size() == 1);
  CHECK(r.doc.spans[0].envelope() == Fragment{0, 20});
  CHECK(r.report.nested == 1);
}

TEST_CASE("normalize: document without overlaps is a fixpoint") {
  auto doc = tokenized("Prograf 5 mg. Kein Stau.");
  doc.add_span(span(doc, "T1", "Medication", 0, 7));
  doc.add_span(span(doc, "T2", "Dosing", 8, 12));
  doc.add_relation({"R1", "Has_dosing", "T1", "T2", ""});
  const auto r = normalize_document(doc, {}, {});
  CHECK(r.report.all_zero());
  CHECK(r.doc.spans == doc.spans);
  CHECK(r.doc.relations == doc.relations);
}

TEST_CASE("normalize: equal-length overlap resolved by corpus frequency") {
  auto doc = tokenized("Ödeme beidseits");
  doc.add_span(span(doc, "T1", "Measurement", 0, 5));
  doc.add_span(span(doc, "T2", "Medical_condition", 0, 5));
  const ConceptFrequency freq{{"Medical_condition", 8953}, {"Measurement", 5429}};
  const auto r = normalize_document(doc, {}, freq);
  REQUIRE(r.doc.spans.size() == 1);
  CHECK(r.doc.spans[0].type == "Medical_condition");
  CHECK(r.report.multi_label == 1);

  // Unseen types tie at zero: lexicographic order decides.
  const auto tie = normalize_document(doc, {}, {});
  CHECK(tie.doc.spans[0].type == "Measurement");
}

TEST_CASE("normalize: cross-sentence spans and their relations are dropped") {
  auto doc = tokenized("Kein Stau. Niere rechts.");
  doc.add_span(span(doc, "T1", "Medical_condition", 5, 16));
  doc.add_span(span(doc, "T2", "Body_part", 11, 16));
  doc.add_span(span(doc, "T3", "Local_specification", 17, 23));
  doc.add_relation({"R1", "Is_located", "T1", "T3", ""});
  doc.add_relation({"R2", "Is_located", "T2", "T3", ""});
  doc.add_attribute({"A1", "LevelOfTruth", "T1", "Negative"});
  const auto r = normalize_document(doc, {}, {});
  CHECK(r.report.cross_sentence == 1);
  CHECK(r.report.relations_dropped == 1);
  CHECK(r.report.attributes_dropped == 1);
  CHECK(r.doc.spans.size() == 2);
  CHECK(r.doc.relations.size() == 1);
  CHECK(r.doc.provenance.has_value());
}

TEST_CASE("normalize: discontinuous spans collapse to envelope or drop") {
  auto doc = tokenized("Prograf 5 mg morgens");
  SpanAnnotation s{"T1", "Dosing", {{8, 9}, {13, 20}}, {}};
  s.surface = doc.surface_of(s.fragments);
  doc.add_span(s);
  auto r = normalize_document(doc, {}, {});
  CHECK(r.doc.spans[0].fragments == std::vector<Fragment>{{8, 20}});
  CHECK(r.doc.spans[0].surface == "5 mg morgens");
  NormalizationPolicy drop;
  drop.collapse_discontinuous = DiscontinuousPolicy::kDrop;
  r = normalize_document(doc, drop, {});
  CHECK(r.doc.spans.empty());
  CHECK(r.report.dropped_discontinuous == 1);
}

TEST_CASE("normalize: idempotent and conflict-free on random documents (property)") {
  const auto& names = Schema::builtin().concept_names();
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto doc = tokenized("Pat. mit Fieber. Im Sono kein Stau. Prograf 5 mg tgl. Niere re. o.B.");
    ConceptFrequency freq;
    for (const auto& n : names) freq[n] = rng.below(5);
    const auto n_spans = rng.below(10);
    for (std::size_t k = 0; k < n_spans; ++k) {
      std::size_t a = rng.below(doc.text.size() - 1);
      std::size_t b = a + 1 + rng.below(std::min<std::size_t>(15, doc.text.size() - a - 1) + 1);
      b = std::min(b, doc.text.size());
      std::vector<Fragment> frags{{a, b}};
      if (rng.bernoulli(0.2) && b + 3 < doc.text.size()) frags.push_back({b + 1, b + 3});
      SpanAnnotation s{"T" + std::to_string(k + 1), rng.pick(names), frags, {}};
      s.surface = doc.surface_of(s.fragments);
      doc.add_span(s);
    }
    if (doc.spans.size() >= 2) doc.add_relation({"R1", "Has_state", "T1", "T2", ""});

    const auto once = normalize_document(doc, {}, freq);
    const auto twice = normalize_document(once.doc, {}, freq);
    CHECK(twice.doc == once.doc);
    CHECK(twice.report.all_zero());

    const auto& spans = once.doc.spans;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      CHECK_FALSE(spans[i].discontinuous());
      bool inside = false;
      for (const auto& sent : once.doc.sentences) {
        inside = inside || (sent.start <= spans[i].start() && spans[i].end() <= sent.end);
      }
      CHECK(inside);
      for (std::size_t j = 0; j < spans.size(); ++j) {
        if (i == j) continue;
        const auto a = spans[i].envelope(), b = spans[j].envelope();
        CHECK_FALSE((a.start <= b.start && b.end <= a.end && a.length() > b.length()));
      }
    }
    // no token carries two labels
    for (std::size_t k = 0; k < once.doc.sentences.size(); ++k) {
      CHECK_NOTHROW(encode_tags(once.doc.sentences[k].tokens.size(),
                                sentence_token_spans(once.doc, k)));
    }
  }
}

TEST_CASE("merge_annotators: most productive annotator wins") {
  AnnotatedDocument a, b, c;
  a.doc_id = b.doc_id = c.doc_id = "doc1";
  a.text = b.text = c.text = U"Kein Stau.";
  a.annotator_id = "A";
  b.annotator_id = "B";
  auto r = merge_annotators({b, a}, {{"A", 700}, {"B", 400}});
  REQUIRE(r.docs.size() == 1);
  CHECK(r.docs[0].annotator_id == "A");
  CHECK(r.log[0].candidates == std::vector<std::string>{"A", "B"});

  r = merge_annotators({b}, {{"A", 700}, {"B", 400}});
  CHECK(r.docs[0].annotator_id == "B");

  a.annotator_id = "a";
  b.annotator_id = "b";
  c.annotator_id = "c";
  r = merge_annotators({c, b, a}, {{"a", 10}, {"b", 10}, {"c", 5}});
  CHECK(r.docs[0].annotator_id == "a");

  b.text = U"Kein Stau!";
  CHECK_THROWS_AS(merge_annotators({a, b}), Error);
}

TEST_CASE("export_conll: BIOES tags for a two-token medication") {
  auto doc = tokenized("Pat. nimmt Prograf retard weiter");
  doc.add_span(span(doc, "T1", "Medication", 11, 25));
  const auto out = export_conll(doc);
  const auto parsed = parse_conll(out);
  REQUIRE(parsed.size() == 1);
  REQUIRE(parsed[0].sentences.size() == 1);
  std::vector<std::string> tags;
  for (const auto& t : parsed[0].sentences[0].tokens) tags.push_back(t.tag);
  CHECK(tags == std::vector<std::string>{"O", "O", "O", "B-Medication", "E-Medication", "O"});
}

TEST_CASE("export_conll: five-token sentence") {
  auto doc = tokenized("heute Prograf retard und Rest");
  doc.add_span(span(doc, "T1", "Medication", 6, 20));
  doc.spans[0].id = "T1";
  const auto parsed = parse_conll(export_conll(doc));
  std::vector<std::string> tags;
  for (const auto& t : parsed[0].sentences[0].tokens) tags.push_back(t.tag);
  CHECK(tags == std::vector<std::string>{"O", "B-Medication", "E-Medication", "O", "O"});
}

TEST_CASE("export_conll: empty document and discontinuous spans") {
  CHECK(export_conll(tokenized("")).empty());
  auto doc = tokenized("Prograf 5 mg morgens");
  SpanAnnotation s{"T7", "Dosing", {{8, 9}, {13, 20}}, {}};
  s.surface = doc.surface_of(s.fragments);
  doc.add_span(s);
  try {
    export_conll(doc);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("T7") != std::string::npos);
  }
}

TEST_CASE("BIOES: decode(encode(spans)) is the identity (property)") {
  Rng rng(3);
  for (const auto scheme : {TagScheme::kBIOES, TagScheme::kBIO}) {
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 1 + rng.below(12);
      std::vector<TokenSpan> spans;
      std::size_t i = 0;
      while (i < n) {
        if (rng.bernoulli(0.4)) {
          const std::size_t len = 1 + rng.below(std::min<std::size_t>(4, n - i));
          spans.push_back({i, i + len, rng.bernoulli(0.5) ? "X" : "Y", {}});
          // adjacent same-type spans are only separable in BIOES
          i += len + (scheme == TagScheme::kBIO ? 1 : 0);
        } else {
          ++i;
        }
      }
      CHECK(decode_tags(encode_tags(n, spans, scheme), scheme) == spans);
    }
  }
}

TEST_CASE("BIOES: repair of invalid sequences") {
  CHECK(decode_tags({"O", "I-X", "E-X"}) == std::vector<TokenSpan>{{1, 3, "X", {}}});
  CHECK(decode_tags({"B-X", "I-X", "O"}) == std::vector<TokenSpan>{{0, 2, "X", {}}});
  CHECK(decode_tags({"B-X", "E-Y"}) ==
        std::vector<TokenSpan>{{0, 1, "X", {}}, {1, 2, "Y", {}}});
  CHECK(decode_tags({"E-X", "S-Y", "I-Y"}) ==
        std::vector<TokenSpan>{{0, 1, "X", {}}, {1, 2, "Y", {}}, {2, 3, "Y", {}}});
  // repair never produces overlaps
  Rng rng(5);
  const std::vector<std::string> alphabet{"O", "B-X", "I-X", "E-X", "S-X", "B-Y", "I-Y", "E-Y", "S-Y"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> tags(1 + rng.below(10));
    for (auto& t : tags) t = rng.pick(alphabet);
    const auto spans = decode_tags(tags);
    for (std::size_t k = 1; k < spans.size(); ++k) CHECK(spans[k - 1].end <= spans[k].begin);
  }
}

TEST_CASE("CoNLL export then re-import yields the same span set") {
  auto doc = tokenized("Prograf 5 mg morgens. Im Sono kein Stau.");
  doc.add_span(span(doc, "T1", "Medication", 0, 7));
  doc.add_span(span(doc, "T2", "Dosing", 8, 20));
  doc.add_span(span(doc, "T3", "DiagLab_Procedure", 25, 29));
  doc.add_span(span(doc, "T4", "Medical_condition", 35, 39));
  const auto parsed = parse_conll(export_conll(doc));
  REQUIRE(parsed[0].sentences.size() == doc.sentences.size());
  for (std::size_t k = 0; k < doc.sentences.size(); ++k) {
    std::vector<std::string> tags;
    for (const auto& t : parsed[0].sentences[k].tokens) tags.push_back(t.tag);
    auto expected = sentence_token_spans(doc, k);
    std::sort(expected.begin(), expected.end());
    CHECK(decode_tags(tags) == expected);
  }
}

TEST_CASE("standoff conformance files round-trip byte for byte") {
  namespace fs = std::filesystem;
  std::vector<fs::path> anns;
  for (const auto& e : fs::directory_iterator(std::string(MEX_TEST_DATA) + "/standoff")) {
    if (e.path().extension() == ".ann") anns.push_back(e.path());
  }
  CHECK(anns.size() >= 20);
  std::set<std::string> concepts, relations, families;
  bool discontinuous = false;
  for (const auto& path : anns) {
    auto txt_path = path;
    txt_path.replace_extension(".txt");
    const auto ann = read_file(path.string());
    const auto txt = read_file(txt_path.string());
    const auto r = parse_standoff(ann, txt, Schema::builtin());
    const auto out = export_standoff(r.doc);
    CHECK_MESSAGE(out.ann == ann, path.filename().string());
    CHECK(out.txt == txt);
    for (const auto& s : r.doc.spans) {
      concepts.insert(s.type);
      discontinuous = discontinuous || s.discontinuous();
    }
    for (const auto& rel : r.doc.relations) relations.insert(rel.relation);
    for (const auto& a : r.doc.attributes) families.insert(a.family);
  }
  CHECK(concepts.size() == 17);
  CHECK(relations.size() == 9);
  CHECK(families.size() == 2);
  CHECK(discontinuous);
}
