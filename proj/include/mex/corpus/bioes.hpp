#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mex/corpus/document.hpp"

namespace mex::corpus {

enum class TagScheme { kBIOES, kBIO };

std::string_view scheme_name(TagScheme s);
TagScheme parse_scheme(std::string_view name);

// Span over token indices [begin, end) of one sentence.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string type;
  std::string id;  // source annotation id, when known

  bool operator==(const TokenSpan& o) const {
    return begin == o.begin && end == o.end && type == o.type;
  }
  bool operator<(const TokenSpan& o) const {
    if (begin != o.begin) return begin < o.begin;
    if (end != o.end) return end < o.end;
    return type < o.type;
  }
};

// One tag per token. Throws mex::Error for overlapping or out-of-range
// spans; normalize the document first.
std::vector<std::string> encode_tags(std::size_t n_tokens, const std::vector<TokenSpan>& spans,
                                     TagScheme scheme = TagScheme::kBIOES);

// Decodes tags into spans. Invalid sequences are repaired: an I or E that
// does not continue a span of the same type opens a new one at that token,
// and a span left open is closed before the next O/B/S or at the end.
std::vector<TokenSpan> decode_tags(const std::vector<std::string>& tags,
                                   TagScheme scheme = TagScheme::kBIOES);

// Splits "B-Medication" into ('B', "Medication"); "O" gives ('O', "").
std::pair<char, std::string> split_tag(std::string_view tag);

// Concept spans of one sentence mapped to token indices (tokens overlapping
// the span). Discontinuous spans are mapped by their envelope when
// `allow_discontinuous`, otherwise rejected with an error naming the span.
std::vector<TokenSpan> sentence_token_spans(const AnnotatedDocument& doc,
                                            std::size_t sentence,
                                            bool allow_discontinuous = false);

}  // namespace mex::corpus
