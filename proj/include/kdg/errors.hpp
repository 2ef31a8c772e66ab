#pragma once

#include <stdexcept>
#include <string>

namespace kdg {

/// Bad caller input: violated precondition, malformed file, unknown key.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value outside a tabulated or supported range.
class OutOfRange : public InvalidInput {
 public:
  OutOfRange(const std::string& what, double lower, double upper)
      : InvalidInput(what), lower_(lower), upper_(upper) {}

  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  double lower_;
  double upper_;
};

/// A numerical procedure could not meet its accuracy contract.
class NumericFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kdg
