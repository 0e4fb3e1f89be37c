#pragma once

#include <stdexcept>
#include <string>

namespace qdiff {

// Input bytes do not match the declared file format.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tabular input is missing a required column or field.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs are well-formed but inconsistent with each other (digest mismatch,
// degenerate data for a statistic).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qdiff
