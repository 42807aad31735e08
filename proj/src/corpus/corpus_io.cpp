#include "mex/corpus/corpus_io.hpp"

#include <algorithm>
#include <filesystem>

#include "mex/core/binary_io.hpp"
#include "mex/core/error.hpp"

namespace fs = std::filesystem;

namespace mex::corpus {

std::vector<std::string> LoadedCorpus::annotators() const {
  std::vector<std::string> out;
  for (const auto& [name, docs] : by_annotator) out.push_back(name);
  return out;
}

std::vector<AnnotatedDocument> LoadedCorpus::all_versions() const {
  std::vector<AnnotatedDocument> out;
  for (const auto& [name, docs] : by_annotator) out.insert(out.end(), docs.begin(), docs.end());
  return out;
}

void attach_pos(AnnotatedDocument& doc, const ConllDocument& conll) {
  std::vector<const ConllToken*> flat;
  for (const auto& s : conll.sentences) {
    for (const auto& t : s.tokens) flat.push_back(&t);
  }
  if (flat.size() != doc.token_count()) {
    throw Error("POS sidecar for " + doc.doc_id + " has " + std::to_string(flat.size()) +
                " tokens, tokenizer produced " + std::to_string(doc.token_count()));
  }
  std::size_t i = 0;
  for (auto& s : doc.sentences) {
    for (auto& t : s.tokens) {
      if (doc.substring_utf8(t.start, t.end) != flat[i]->form) {
        throw Error("POS sidecar for " + doc.doc_id + " disagrees with tokenization at token " +
                    std::to_string(i) + " ('" + flat[i]->form + "')");
      }
      t.pos = flat[i]->pos;
      ++i;
    }
  }
}

std::vector<AnnotatedDocument> load_annotator_dir(const std::string& dir,
                                                  const std::string& annotator,
                                                  const Schema& schema,
                                                  const Tokenizer& tokenizer,
                                                  const ParseOptions& options,
                                                  std::vector<std::string>* warnings) {
  std::vector<AnnotatedDocument> docs;
  auto load_dir = [&](const fs::path& d, DocType type) {
    std::vector<fs::path> txts;
    for (const auto& entry : fs::directory_iterator(d)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        txts.push_back(entry.path());
      }
    }
    std::sort(txts.begin(), txts.end());
    for (const auto& txt : txts) {
      auto ann_path = txt;
      ann_path.replace_extension(".ann");
      const std::string ann = fs::exists(ann_path) ? read_file(ann_path.string()) : std::string();
      ParseResult parsed;
      try {
        parsed = parse_standoff(ann, read_file(txt.string()), schema, options);
      } catch (const ParseError& e) {
        throw Error(ann_path.string() + ": " + e.what());
      }
      auto& doc = parsed.doc;
      doc.doc_id = txt.stem().string();
      doc.doc_type = type;
      doc.annotator_id = annotator;
      tokenizer.tokenize(doc);
      auto conll_path = txt;
      conll_path.replace_extension(".conll");
      if (fs::exists(conll_path)) {
        const auto conll = parse_conll(read_file(conll_path.string()));
        if (!conll.empty()) attach_pos(doc, conll.front());
      }
      if (warnings) {
        for (const auto& w : parsed.warnings) {
          warnings->push_back(ann_path.string() + ":" + std::to_string(w.line) + ": " + w.message);
        }
      }
      docs.push_back(std::move(doc));
    }
  };
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw Error("not a directory: " + dir);
  load_dir(root, DocType::kClinicalNote);
  for (const auto type : {DocType::kClinicalNote, DocType::kDischargeSummary}) {
    const auto sub = root / std::string(doc_type_name(type));
    if (fs::is_directory(sub)) load_dir(sub, type);
  }
  std::sort(docs.begin(), docs.end(),
            [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  for (std::size_t i = 1; i < docs.size(); ++i) {
    if (docs[i].doc_id == docs[i - 1].doc_id) {
      throw Error("duplicate document id " + docs[i].doc_id + " for annotator " + annotator);
    }
  }
  return docs;
}

LoadedCorpus load_corpus(const std::string& root, const Schema& schema,
                         const Tokenizer& tokenizer, const ParseOptions& options) {
  if (!fs::is_directory(root)) throw Error("corpus root is not a directory: " + root);
  LoadedCorpus corpus;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  for (const auto& d : dirs) {
    const auto name = d.filename().string();
    corpus.by_annotator[name] =
        load_annotator_dir(d.string(), name, schema, tokenizer, options, &corpus.warnings);
  }
  if (corpus.by_annotator.empty()) throw Error("no annotator directories under " + root);
  return corpus;
}

void save_document(const std::string& annotator_dir, const AnnotatedDocument& doc,
                   bool with_conll) {
  const fs::path dir = fs::path(annotator_dir) / std::string(doc_type_name(doc.doc_type));
  fs::create_directories(dir);
  const auto files = export_standoff(doc);
  write_file((dir / (doc.doc_id + ".txt")).string(), files.txt);
  write_file((dir / (doc.doc_id + ".ann")).string(), files.ann);
  if (with_conll && !doc.sentences.empty()) {
    write_file((dir / (doc.doc_id + ".conll")).string(), export_conll(doc));
  }
}

}  // namespace mex::corpus
