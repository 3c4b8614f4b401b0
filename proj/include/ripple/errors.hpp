#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ripple {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or configuration value.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Wrong magic, version mismatch, checksum failure or truncated payload.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnknownCharacter : public Error {
 public:
  explicit UnknownCharacter(char32_t c);

  char32_t character() const noexcept { return character_; }

 private:
  char32_t character_;
};

// A pipeline stage was asked to run before one of its inputs was produced.
class MissingArtifact : public Error {
 public:
  MissingArtifact(std::string stage, const std::string& what)
      : Error(what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace ripple
