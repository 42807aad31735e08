#include "mex/corpus/bioes.hpp"

#include <optional>

#include "mex/core/error.hpp"

namespace mex::corpus {

std::string_view scheme_name(TagScheme s) { return s == TagScheme::kBIOES ? "BIOES" : "BIO"; }

TagScheme parse_scheme(std::string_view name) {
  if (name == "BIOES" || name == "bioes") return TagScheme::kBIOES;
  if (name == "BIO" || name == "bio") return TagScheme::kBIO;
  throw Error("unknown tag scheme '" + std::string(name) + "'");
}

std::pair<char, std::string> split_tag(std::string_view tag) {
  if (tag == "O" || tag.empty()) return {'O', ""};
  if (tag.size() < 3 || tag[1] != '-') throw Error("malformed tag '" + std::string(tag) + "'");
  return {tag[0], std::string(tag.substr(2))};
}

std::vector<std::string> encode_tags(std::size_t n, const std::vector<TokenSpan>& spans,
                                     TagScheme scheme) {
  std::vector<std::string> tags(n, "O");
  std::vector<bool> used(n, false);
  for (const auto& s : spans) {
    if (s.begin >= s.end || s.end > n) {
      throw Error("span " + s.id + " has invalid token range");
    }
    for (std::size_t i = s.begin; i < s.end; ++i) {
      if (used[i]) {
        throw Error("overlapping spans at token " + std::to_string(i) +
                    (s.id.empty() ? "" : " (span " + s.id + ")") +
                    "; normalize the document before encoding");
      }
      used[i] = true;
    }
    const bool single = s.end - s.begin == 1;
    for (std::size_t i = s.begin; i < s.end; ++i) {
      char p = 'I';
      if (scheme == TagScheme::kBIOES) {
        if (single) p = 'S';
        else if (i == s.begin) p = 'B';
        else if (i + 1 == s.end) p = 'E';
      } else if (i == s.begin) {
        p = 'B';
      }
      tags[i] = std::string(1, p) + "-" + s.type;
    }
  }
  return tags;
}

std::vector<TokenSpan> decode_tags(const std::vector<std::string>& tags, TagScheme scheme) {
  std::vector<TokenSpan> out;
  std::optional<TokenSpan> open;
  auto close = [&](std::size_t end) {
    if (open) {
      open->end = end;
      out.push_back(*open);
      open.reset();
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto [prefix, type] = split_tag(tags[i]);
    if (scheme == TagScheme::kBIO && (prefix == 'S' || prefix == 'E')) {
      throw Error("tag '" + tags[i] + "' is not valid in BIO");
    }
    switch (prefix) {
      case 'O':
        close(i);
        break;
      case 'S':
        close(i);
        out.push_back({i, i + 1, type, {}});
        break;
      case 'B':
        close(i);
        open = TokenSpan{i, 0, type, {}};
        break;
      case 'I':
        if (!open || open->type != type) {
          close(i);
          open = TokenSpan{i, 0, type, {}};
        }
        break;
      case 'E':
        if (!open || open->type != type) {
          close(i);
          open = TokenSpan{i, 0, type, {}};
        }
        close(i + 1);
        break;
      default:
        throw Error("unknown tag prefix in '" + tags[i] + "'");
    }
  }
  close(tags.size());
  return out;
}

std::vector<TokenSpan> sentence_token_spans(const AnnotatedDocument& doc, std::size_t k,
                                            bool allow_discontinuous) {
  const auto& sent = doc.sentences.at(k);
  std::vector<TokenSpan> out;
  for (const auto& s : doc.spans) {
    const auto env = s.envelope();
    if (env.end <= sent.start || env.start >= sent.end) continue;
    if (s.discontinuous() && !allow_discontinuous) {
      throw Error("discontinuous span " + s.id + " in document " + doc.doc_id +
                  " cannot be exported to token tags");
    }
    std::size_t first = 0, last = 0;
    bool found = false;
    for (std::size_t i = 0; i < sent.tokens.size(); ++i) {
      const auto& t = sent.tokens[i];
      if (t.start < env.end && env.start < t.end) {
        if (!found) first = i;
        last = i;
        found = true;
      }
    }
    if (found) out.push_back({first, last + 1, s.type, s.id});
  }
  return out;
}

}  // namespace mex::corpus
