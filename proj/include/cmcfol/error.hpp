#pragma once

#include <stdexcept>
#include <string>

namespace cmcfol {

// All library failures are thrown as Error. The kind drives the CLI exit
// code: Usage -> 2, everything else -> 1.
class Error : public std::runtime_error {
public:
  enum class Kind { Parse, Domain, Precondition, Usage };

  Error(Kind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

// Parse errors carry the byte offset of the first offending character and a
// description of what was expected there.
class ParseError : public Error {
public:
  ParseError(std::size_t offset, std::string expected, std::string message)
      : Error(Kind::Parse, std::move(message)), offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const { return offset_; }
  const std::string& expected() const { return expected_; }

private:
  std::size_t offset_;
  std::string expected_;
};

[[noreturn]] inline void throw_domain(const std::string& msg) {
  throw Error(Error::Kind::Domain, msg);
}

[[noreturn]] inline void throw_precondition(const std::string& msg) {
  throw Error(Error::Kind::Precondition, msg);
}

[[noreturn]] inline void throw_usage(const std::string& msg) {
  throw Error(Error::Kind::Usage, msg);
}

}  // namespace cmcfol
