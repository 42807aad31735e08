#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mex/corpus/document.hpp"
#include "mex/corpus/schema.hpp"

namespace mex::corpus {

// What to do with concept/relation/attribute names missing from the schema.
enum class UnknownNames { kReject, kWarn };

struct ParseOptions {
  UnknownNames unknown_names = UnknownNames::kReject;
};

struct Diagnostic {
  std::size_t line = 0;  // 1-based; 0 when not tied to a line
  std::string message;
};

struct ParseResult {
  AnnotatedDocument doc;
  std::vector<Diagnostic> warnings;
};

// Parses a brat-style .ann file against its .txt. Offsets are code points,
// end-exclusive. Errors are reported as mex::ParseError with the line number.
ParseResult parse_standoff(std::string_view ann_content,
                           std::string_view doc_content, const Schema& schema,
                           const ParseOptions& options = {});

struct StandoffFiles {
  std::string ann;
  std::string txt;
};

// Inverse of parse_standoff; byte-identical for files that parse cleanly.
StandoffFiles export_standoff(const AnnotatedDocument& doc);

}  // namespace mex::corpus
