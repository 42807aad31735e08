#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mex {

// Raised for invalid user input: malformed files, bad configuration,
// inconsistent corpora. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A malformed record in a line-oriented input file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Binary container problems: bad magic, version mismatch, checksum failure.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace mex
