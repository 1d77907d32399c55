#pragma once

#include <stdexcept>
#include <string>

namespace rpvfield {

// Shapes of two operands are incompatible for the requested operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (log of a negative,
// zero raised to a negative power, altitude above the pressure ceiling, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Direction lies below a surface plane, or a vector is not unit length.
class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed file contents. The message names the file and the byte offset.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t offset, const std::string& what)
      : std::runtime_error(file + ": byte " + std::to_string(offset) + ": " + what),
        file_(file),
        offset_(offset) {}

  const std::string& file() const { return file_; }
  std::size_t offset() const { return offset_; }

 private:
  std::string file_;
  std::size_t offset_;
};

// Semantically invalid data (corr outside [0,1], missing depth prior, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure during optimisation (non-finite loss).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rpvfield
