#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mex/corpus/document.hpp"

namespace mex::corpus {

struct TokenizerConfig {
  // Lower-cased words ending in '.', e.g. "ggf.", "z.b.".
  std::set<std::u32string> abbreviations;

  // The shipped German clinical list.
  static TokenizerConfig builtin();

  // Adds entries from a file (one per line, '#' comments).
  void extend_from_file(const std::string& path);
  void extend_from_text(std::string_view text);

  std::vector<std::string> abbreviation_list() const;
};

// Rule-based splitter. A token is a maximal run of letters/digits or one
// punctuation mark. Sentences end at '.', '!', '?' followed by whitespace or
// end of text, and at line breaks, except after listed abbreviations and
// after day.month. date prefixes.
class Tokenizer {
 public:
  Tokenizer() : Tokenizer(TokenizerConfig::builtin()) {}
  explicit Tokenizer(TokenizerConfig config) : config_(std::move(config)) {}

  std::vector<Sentence> split(std::u32string_view text) const;

  // Fills doc.sentences from doc.text.
  void tokenize(AnnotatedDocument& doc) const;

  const TokenizerConfig& config() const { return config_; }

 private:
  bool suppresses_break(std::u32string_view text, std::size_t period) const;

  TokenizerConfig config_;
};

std::u32string to_lower(std::u32string_view s);

}  // namespace mex::corpus
