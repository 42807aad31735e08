#include "mex/workbench/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "mex/core/error.hpp"
#include "mex/core/utf8.hpp"
#include "mex/corpus/corpus_io.hpp"

namespace mex::workbench {

// Generated from data/synthetic_templates.txt.
extern const char* const kBuiltinTemplates;

namespace {

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

// One tokenizer token: a run of letters/digits or a single other character.
bool atomic_form(const std::string& form) {
  const auto cps = utf8::decode(form);
  if (cps.empty()) return false;
  if (cps.size() == 1) return !utf8::is_space(cps[0]);
  return std::all_of(cps.begin(), cps.end(), [](char32_t c) { return utf8::is_alnum(c); });
}

TaggedWord tagged_word(const std::string& item, std::size_t line) {
  const auto slash = item.rfind('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == item.size()) {
    throw ParseError(line, "expected word/POS, got '" + item + "'");
  }
  TaggedWord w{item.substr(0, slash), item.substr(slash + 1)};
  if (!atomic_form(w.form)) throw ParseError(line, "'" + w.form + "' is not a single token");
  return w;
}

SentenceTemplate parse_template(const std::string& line_text, std::size_t line, const corpus::Schema& schema) {
  SentenceTemplate t;
  t.line = line;
  const auto tab = line_text.find('\t');
  const auto pattern = split_ws(line_text.substr(0, tab));
  const auto notes = tab == std::string::npos ? std::vector<std::string>{} : split_ws(line_text.substr(tab + 1));
  std::size_t slots = 0;
  for (const auto& item : pattern) {
    if (item.front() == '{') {
      const auto colon = item.find(':');
      if (item.back() != '}' || colon == std::string::npos) throw ParseError(line, "bad slot '" + item + "'");
      TemplateSlot s;
      s.type = item.substr(1, colon - 1);
      s.category = item.substr(colon + 1, item.size() - colon - 2);
      if (!schema.has_concept(s.type)) {
        throw ParseError(line, "template references undeclared concept type '" + s.type + "'");
      }
      t.parts.push_back(std::move(s));
      ++slots;
    } else {
      if (t.parts.empty() || t.parts.back().literal.empty()) t.parts.emplace_back();
      t.parts.back().literal.push_back(tagged_word(item, line));
    }
  }
  if (pattern.empty()) throw ParseError(line, "empty template");

  std::vector<std::string> slot_types;
  for (const auto& p : t.parts) {
    if (p.literal.empty()) slot_types.push_back(p.type);
  }
  auto slot_index = [&](const std::string& s) {
    std::size_t k = 0;
    try {
      k = std::stoul(s);
    } catch (const std::exception&) {
      throw ParseError(line, "bad slot reference '" + s + "'");
    }
    if (k == 0 || k > slots) throw ParseError(line, "slot reference " + s + " out of range");
    return k - 1;
  };
  for (const auto& n : notes) {
    const auto gt = n.find('>');
    const auto at = n.find('@');
    if (gt != std::string::npos) {
      const auto colon = n.find(':', gt);
      if (colon == std::string::npos) throw ParseError(line, "bad relation '" + n + "'");
      TemplateLink l{slot_index(n.substr(0, gt)), slot_index(n.substr(gt + 1, colon - gt - 1)), n.substr(colon + 1)};
      if (!schema.has_relation(l.relation)) {
        throw ParseError(line, "template references undeclared relation '" + l.relation + "'");
      }
      if (!schema.signature_allows(l.relation, slot_types[l.arg1], slot_types[l.arg2])) {
        throw ParseError(line, l.relation + " does not accept " + slot_types[l.arg1] + " -> " + slot_types[l.arg2]);
      }
      t.links.push_back(std::move(l));
    } else if (at != std::string::npos) {
      const auto eq = n.find('=', at);
      if (eq == std::string::npos) throw ParseError(line, "bad attribute '" + n + "'");
      TemplateAttribute a{slot_index(n.substr(0, at)), n.substr(at + 1, eq - at - 1), n.substr(eq + 1)};
      const auto* family = schema.attribute(a.family);
      if (!family || std::find(family->values.begin(), family->values.end(), a.value) == family->values.end()) {
        throw ParseError(line, "undeclared attribute '" + a.family + "=" + a.value + "'");
      }
      t.attributes.push_back(std::move(a));
    } else {
      throw ParseError(line, "bad annotation '" + n + "'");
    }
  }
  return t;
}

}  // namespace

TemplateInventory TemplateInventory::parse(std::string_view text, const corpus::Schema& schema) {
  TemplateInventory inv;
  std::istringstream in{std::string(text)};
  std::string section;
  std::size_t line_no = 0;
  std::vector<std::pair<std::string, std::size_t>> categories_used;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos || line[b] == '#') continue;
    if (line[b] == '[') {
      section = line.substr(b);
      if (section != "[lexicon]" && section != "[note]" && section != "[summary]" && section != "[heading]" &&
          section != "[abbrev]") {
        throw ParseError(line_no, "unknown section " + section);
      }
      continue;
    }
    if (section == "[lexicon]") {
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw ParseError(line_no, "expected category<TAB>words");
      std::vector<TaggedWord> words;
      for (const auto& item : split_ws(line.substr(tab + 1))) words.push_back(tagged_word(item, line_no));
      if (words.empty()) throw ParseError(line_no, "empty lexicon entry");
      inv.lexicon_[line.substr(0, tab)].push_back(std::move(words));
    } else if (section == "[note]" || section == "[summary]" || section == "[heading]") {
      auto t = parse_template(line, line_no, schema);
      for (const auto& p : t.parts) {
        if (p.literal.empty()) categories_used.emplace_back(p.category, line_no);
      }
      (section == "[note]" ? inv.notes_ : section == "[summary]" ? inv.summary_ : inv.headings_).push_back(std::move(t));
    } else if (section == "[abbrev]") {
      const auto parts = split_ws(line);
      if (parts.size() != 2 || !atomic_form(parts[1])) throw ParseError(line_no, "expected long<TAB>short");
      inv.abbrev_[parts[0]] = parts[1];
    } else {
      throw ParseError(line_no, "content outside a section");
    }
  }
  for (const auto& [category, line] : categories_used) {
    if (!inv.lexicon_.count(category)) throw ParseError(line, "lexicon category '" + category + "' is empty");
  }
  if (inv.notes_.empty()) throw Error("template inventory has no [note] templates");
  return inv;
}

std::string_view TemplateInventory::builtin_text() { return kBuiltinTemplates; }

const TemplateInventory& TemplateInventory::builtin() {
  static const TemplateInventory inv = parse(kBuiltinTemplates, corpus::Schema::builtin());
  return inv;
}

std::set<std::string> TemplateInventory::concept_types() const {
  std::set<std::string> out;
  for (const auto* group : {&notes_, &summary_, &headings_}) {
    for (const auto& t : *group) {
      for (const auto& p : t.parts) {
        if (p.literal.empty()) out.insert(p.type);
      }
    }
  }
  return out;
}

std::set<std::string> TemplateInventory::relation_types() const {
  std::set<std::string> out;
  for (const auto* group : {&notes_, &summary_, &headings_}) {
    for (const auto& t : *group) {
      for (const auto& l : t.links) out.insert(l.relation);
    }
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (!(summary_fraction >= 0.0 && summary_fraction <= 1.0)) throw Error("summary fraction must be in [0, 1]");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw Error("noise rate must be in [0, 1]");
  if (!(note_tokens >= 1.0) || !(summary_tokens >= 1.0)) throw Error("document lengths must be positive");
  if (note_spread < 0.0 || summary_spread < 0.0) throw Error("length spread must be non-negative");
  if (annotator.empty()) throw Error("annotator id must not be empty");
}

namespace {

struct GenToken {
  std::string form;
  std::string pos;
};

struct GenSpan {
  std::size_t begin, end;  // token indices into the document
  std::string type;
};

struct GenSentence {
  std::vector<GenToken> tokens;
  std::vector<GenSpan> spans;  // sentence-local token indices
  const SentenceTemplate* source = nullptr;
};

std::string add_typo(const std::string& form, Rng& rng) {
  auto cps = utf8::decode(form);
  const auto i = 1 + rng.below(cps.size() - 2);
  if (rng.bernoulli(0.5)) {
    std::swap(cps[i], cps[i + 1]);
  } else {
    cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return utf8::encode(cps);
}

void apply_noise(std::string& form, double rate, const TemplateInventory& inv, Rng& rng) {
  if (rate <= 0.0 || !rng.bernoulli(rate)) return;
  const auto a = inv.abbreviations().find(form);
  if (a != inv.abbreviations().end()) {
    form = a->second;
    return;
  }
  const auto cps = utf8::decode(form);
  const bool letters = std::all_of(cps.begin(), cps.end(), [](char32_t c) { return utf8::is_alnum(c) && !utf8::is_digit(c); });
  if (letters && cps.size() >= 4) form = add_typo(form, rng);
}

GenSentence realize(const SentenceTemplate& t, const TemplateInventory& inv, double noise, Rng& rng) {
  GenSentence s;
  s.source = &t;
  for (const auto& p : t.parts) {
    if (!p.literal.empty()) {
      for (const auto& w : p.literal) s.tokens.push_back({w.form, w.pos});
      continue;
    }
    const auto& entry = rng.pick(inv.lexicon().at(p.category));
    const auto begin = s.tokens.size();
    for (const auto& w : entry) s.tokens.push_back({w.form, w.pos});
    s.spans.push_back({begin, s.tokens.size(), p.type});
  }
  for (auto& tok : s.tokens) apply_noise(tok.form, noise, inv, rng);
  return s;
}

double draw_length(double mean, double spread, double floor, Rng& rng) {
  return std::max(floor, mean + spread * rng.normal());
}

}  // namespace

std::vector<corpus::AnnotatedDocument> generate_corpus(const SyntheticSpec& spec,
                                                       const TemplateInventory& inv,
                                                       const corpus::Schema& schema) {
  spec.validate();
  for (const auto& type : inv.concept_types()) {
    if (!schema.has_concept(type)) throw Error("template references undeclared concept type '" + type + "'");
  }
  const corpus::Tokenizer tokenizer;
  std::vector<const SentenceTemplate*> long_pool;
  for (const auto& t : inv.notes()) long_pool.push_back(&t);
  for (const auto& t : inv.summary()) long_pool.push_back(&t);

  std::vector<corpus::AnnotatedDocument> docs;
  for (std::size_t i = 0; i < spec.documents; ++i) {
    Rng rng(derive_seed(spec.seed, i));
    const bool summary = rng.bernoulli(spec.summary_fraction);
    const double target = summary ? draw_length(spec.summary_tokens, spec.summary_spread, 100, rng)
                                  : draw_length(spec.note_tokens, spec.note_spread, 5, rng);

    std::vector<GenSentence> sentences;
    std::size_t count = 0;
    std::size_t since_heading = 0;
    while (true) {
      GenSentence s;
      if (summary && !inv.headings().empty() && (sentences.empty() || (since_heading >= 6 && rng.bernoulli(0.15)))) {
        s = realize(rng.pick(inv.headings()), inv, spec.noise_rate, rng);
        since_heading = 0;
      } else {
        s = realize(summary ? *rng.pick(long_pool) : rng.pick(inv.notes()), inv, spec.noise_rate, rng);
        ++since_heading;
      }
      // Keep the sentence if that brings the length closer to the target.
      if (!sentences.empty() && static_cast<double>(count) + 0.5 * static_cast<double>(s.tokens.size()) > target) break;
      count += s.tokens.size();
      sentences.push_back(std::move(s));
    }

    corpus::AnnotatedDocument doc;
    doc.doc_id = (summary ? "summary_" : "note_") + std::to_string(i);
    doc.doc_type = summary ? corpus::DocType::kDischargeSummary : corpus::DocType::kClinicalNote;
    doc.annotator_id = spec.annotator;
    std::vector<GenToken> flat;
    std::vector<std::pair<std::size_t, std::size_t>> offsets;
    for (std::size_t k = 0; k < sentences.size(); ++k) {
      if (k > 0) doc.text += summary || rng.bernoulli(0.1) ? U"\n" : U" ";
      for (std::size_t j = 0; j < sentences[k].tokens.size(); ++j) {
        if (j > 0) doc.text += U' ';
        const auto form = utf8::decode(sentences[k].tokens[j].form);
        offsets.emplace_back(doc.text.size(), doc.text.size() + form.size());
        doc.text += form;
        flat.push_back(sentences[k].tokens[j]);
      }
    }

    std::size_t base = 0, next_t = 1, next_r = 1, next_a = 1;
    for (const auto& s : sentences) {
      std::vector<std::string> ids;
      for (const auto& sp : s.spans) {
        corpus::SpanAnnotation a;
        a.id = "T" + std::to_string(next_t++);
        a.type = sp.type;
        a.fragments = {{offsets[base + sp.begin].first, offsets[base + sp.end - 1].second}};
        a.surface = doc.surface_of(a.fragments);
        ids.push_back(a.id);
        doc.add_span(std::move(a));
      }
      for (const auto& l : s.source->links) {
        doc.add_relation({"R" + std::to_string(next_r++), l.relation, ids[l.arg1], ids[l.arg2], ""});
      }
      for (const auto& at : s.source->attributes) {
        doc.add_attribute({"A" + std::to_string(next_a++), at.family, ids[at.slot], at.value});
      }
      base += s.tokens.size();
    }

    tokenizer.tokenize(doc);
    std::size_t k = 0;
    for (auto& sent : doc.sentences) {
      for (auto& tok : sent.tokens) {
        if (k >= flat.size() || tok.start != offsets[k].first || tok.end != offsets[k].second) {
          throw Error("synthetic document " + doc.doc_id + " does not tokenize as generated");
        }
        tok.pos = flat[k++].pos;
      }
    }
    if (k != flat.size()) throw Error("synthetic document " + doc.doc_id + " does not tokenize as generated");
    docs.push_back(std::move(doc));
  }
  return docs;
}

corpus::AnnotatedDocument perturb_annotations(const corpus::AnnotatedDocument& doc, double rate, Rng& rng,
                                              const corpus::Schema& schema, const std::string& annotator) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("perturbation rate must be in [0, 1]");
  corpus::AnnotatedDocument out = doc;
  out.annotator_id = annotator;
  const auto names = schema.concept_names();
  std::set<std::string> dropped;
  std::vector<corpus::SpanAnnotation> kept;
  for (auto s : out.spans) {
    if (!rng.bernoulli(rate)) {
      kept.push_back(std::move(s));
      continue;
    }
    auto op = rng.below(3);
    std::vector<const corpus::Token*> covered;
    for (const auto& sent : out.sentences) {
      for (const auto& t : sent.tokens) {
        if (t.start >= s.start() && t.end <= s.end()) covered.push_back(&t);
      }
    }
    if (op == 2 && (covered.size() < 2 || s.discontinuous())) op = 1;
    if (op == 0) {
      dropped.insert(s.id);
      continue;
    }
    if (op == 1) {
      std::string type = s.type;
      while (type == s.type) type = rng.pick(names);
      s.type = type;
    } else {
      s.fragments.back().end = covered[covered.size() - 2]->end;
      s.surface = out.surface_of(s.fragments);
    }
    kept.push_back(std::move(s));
  }
  out.spans = std::move(kept);
  std::erase_if(out.relations, [&](const auto& r) { return dropped.count(r.arg1) || dropped.count(r.arg2); });
  std::erase_if(out.attributes, [&](const auto& a) { return dropped.count(a.target) > 0; });
  out.prune_order();
  return out;
}

SynthesisSummary summarize(const std::vector<corpus::AnnotatedDocument>& docs) {
  SynthesisSummary s;
  s.documents = docs.size();
  for (const auto& d : docs) {
    const auto n = d.token_count();
    if (d.doc_type == corpus::DocType::kDischargeSummary) {
      ++s.summaries;
      s.summary_tokens += n;
    } else {
      ++s.notes;
      s.note_tokens += n;
    }
    s.spans += d.spans.size();
    s.relations += d.relations.size();
  }
  return s;
}

SynthesisSummary write_synthetic_corpus(const std::string& root, const SyntheticSpec& spec,
                                        const TemplateInventory& inventory, const corpus::Schema& schema,
                                        bool second_annotator, double perturbation_rate) {
  const auto docs = generate_corpus(spec, inventory, schema);
  const auto dir = (std::filesystem::path(root) / spec.annotator).string();
  for (const auto& d : docs) corpus::save_document(dir, d, true);
  if (second_annotator) {
    const auto other = (std::filesystem::path(root) / "annotator_b").string();
    for (std::size_t i = 0; i < docs.size(); ++i) {
      Rng rng(derive_seed(~spec.seed, i));
      corpus::save_document(other, perturb_annotations(docs[i], perturbation_rate, rng, schema, "annotator_b"), true);
    }
  }
  return summarize(docs);
}

}  // namespace mex::workbench
