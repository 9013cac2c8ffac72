#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tdw {

// Input outside an operation's domain (bad ranges, grid outside the scaffold, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Wrench matrix is rank deficient or a tendon has zero length.
class SingularGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Requested layout does not fit the scaffold / overtube.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tdw
