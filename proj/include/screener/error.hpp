#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace screener {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; line is 1-based (0 when not tied to a line).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(std::string id)
      : Error("duplicate document id \"" + id + "\""), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class MissingIdError : public Error {
 public:
  explicit MissingIdError(std::string id)
      : Error("missing document id \"" + id + "\""), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

// Precondition violated by the caller's arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Input is well formed but cannot support the requested computation
// (single-class training set, empty vocabulary, all-identical rows, ...).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

}  // namespace screener
