#ifndef SILA_ERROR_HPP
#define SILA_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sila {

// Base for all library errors. Subclasses distinguish the broad failure
// categories callers may want to handle separately.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument values (sizes, capacities, config fields).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

// A solution fails the problem's feasibility rules.
class FeasibilityError : public Error {
public:
  using Error::Error;
};

// Malformed or unsupported input files.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

// Shape or contract violations in the tensor/model layer.
class ShapeError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace sila

#endif
