#include "mex/corpus/tokenizer.hpp"

#include <sstream>

#include "mex/core/binary_io.hpp"
#include "mex/core/utf8.hpp"

namespace mex::corpus {

// Generated from data/abbreviations_de.txt.
extern const char* const kBuiltinAbbreviations;

namespace {

bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?'; }

bool is_closing(char32_t c) {
  return c == U')' || c == U']' || c == U'"' || c == U'\'' || c == 0xBB ||
         c == 0x201C || c == 0x2019;
}

}  // namespace

std::u32string to_lower(std::u32string_view s) {
  std::u32string out(s);
  for (auto& c : out) {
    if ((c >= U'A' && c <= U'Z') || (c >= 0xC0 && c <= 0xDE && c != 0xD7)) c += 32;
  }
  return out;
}

TokenizerConfig TokenizerConfig::builtin() {
  TokenizerConfig config;
  config.extend_from_text(kBuiltinAbbreviations);
  return config;
}

void TokenizerConfig::extend_from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    abbreviations.insert(to_lower(utf8::decode(line.substr(b, e - b + 1))));
  }
}

void TokenizerConfig::extend_from_file(const std::string& path) {
  extend_from_text(read_file(path));
}

std::vector<std::string> TokenizerConfig::abbreviation_list() const {
  std::vector<std::string> out;
  for (const auto& a : abbreviations) out.push_back(utf8::encode(a));
  return out;
}

bool Tokenizer::suppresses_break(std::u32string_view text, std::size_t period) const {
  std::size_t begin = period;
  while (begin > 0 && !utf8::is_space(text[begin - 1])) --begin;
  const auto word = text.substr(begin, period + 1 - begin);
  if (config_.abbreviations.count(to_lower(word))) return true;

  // "11.01." introducing a year or continuing a date.
  std::size_t i = 0;
  auto digits = [&](std::size_t max) {
    std::size_t n = 0;
    while (i < word.size() && utf8::is_digit(word[i]) && n < max) ++i, ++n;
    return n > 0 && (i == word.size() || !utf8::is_digit(word[i]));
  };
  if (digits(2) && i < word.size() && word[i] == U'.') {
    ++i;
    if (digits(2) && i + 1 == word.size() && word[i] == U'.') return true;
  }
  return false;
}

std::vector<Sentence> Tokenizer::split(std::u32string_view text) const {
  std::vector<Token> tokens;
  for (std::size_t i = 0; i < text.size();) {
    if (utf8::is_space(text[i])) {
      ++i;
    } else if (utf8::is_alnum(text[i])) {
      std::size_t j = i;
      while (j < text.size() && utf8::is_alnum(text[j])) ++j;
      tokens.push_back({i, j, {}});
      i = j;
    } else {
      tokens.push_back({i, i + 1, {}});
      ++i;
    }
  }

  std::vector<Sentence> sentences;
  Sentence current;
  auto close = [&]() {
    if (current.tokens.empty()) return;
    current.start = current.tokens.front().start;
    current.end = current.tokens.back().end;
    sentences.push_back(std::move(current));
    current = Sentence{};
  };

  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const auto& tok = tokens[k];
    current.tokens.push_back(tok);
    const bool last = k + 1 == tokens.size();
    if (last) break;
    const auto& next = tokens[k + 1];

    bool newline = false;
    for (std::size_t p = tok.end; p < next.start; ++p) newline = newline || text[p] == U'\n';
    if (newline) {
      close();
      continue;
    }

    const char32_t c = text[tok.start];
    if (tok.end - tok.start != 1 || !(is_terminal(c) || is_closing(c))) continue;
    // Closing quotes and brackets only end a sentence right after a terminal.
    std::size_t term = tok.start;
    while (term > 0 && is_closing(text[term]) &&
           (is_closing(text[term - 1]) || is_terminal(text[term - 1]))) {
      --term;
    }
    if (!is_terminal(text[term])) continue;
    if (next.start == tok.end) continue;  // glued: "11.01.2018", "?!", ".)"
    if (text[term] == U'.' && suppresses_break(text, term)) continue;
    close();
  }
  close();
  return sentences;
}

void Tokenizer::tokenize(AnnotatedDocument& doc) const { doc.sentences = split(doc.text); }

}  // namespace mex::corpus
