#include "mex/corpus/conll.hpp"

#include <sstream>

#include "mex/core/error.hpp"
#include "mex/core/utf8.hpp"

namespace mex::corpus {

std::string export_conll(const AnnotatedDocument& doc, TagScheme scheme) {
  if (doc.sentences.empty()) return {};
  std::string out = "#doc " + doc.doc_id + "\n";
  if (doc.provenance) out += "#policy " + *doc.provenance + "\n";
  for (std::size_t k = 0; k < doc.sentences.size(); ++k) {
    const auto& sent = doc.sentences[k];
    const auto tags = encode_tags(sent.tokens.size(), sentence_token_spans(doc, k), scheme);
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      const auto& t = sent.tokens[i];
      out += doc.substring_utf8(t.start, t.end);
      out += '\t';
      out += t.pos.empty() ? "_" : t.pos;
      out += '\t';
      out += tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::vector<ConllDocument> parse_conll(std::string_view content) {
  std::vector<ConllDocument> docs;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t line_no = 0;
  ConllSentence sent;
  auto current = [&]() -> ConllDocument& {
    if (docs.empty()) docs.emplace_back();
    return docs.back();
  };
  auto flush = [&]() {
    if (!sent.tokens.empty()) current().sentences.push_back(std::move(sent));
    sent = ConllSentence{};
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.rfind("#doc ", 0) == 0) {
      flush();
      docs.emplace_back();
      docs.back().doc_id = line.substr(5);
      continue;
    }
    if (line.rfind("#policy ", 0) == 0) {
      current().provenance = line.substr(8);
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3 || cols[0].empty()) {
      throw ParseError(line_no, "expected FORM<TAB>POS<TAB>TAG");
    }
    if (!utf8::is_valid(cols[0])) throw ParseError(line_no, "invalid UTF-8 in token");
    sent.tokens.push_back({cols[0], cols[1] == "_" ? "" : cols[1], cols[2]});
  }
  flush();
  return docs;
}

}  // namespace mex::corpus
