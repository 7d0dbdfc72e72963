#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace esqkd {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// All Born probabilities of a measurement vanished.
class NumericalDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A derivation that must succeed for a correct engine did not.
class DerivationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AmbiguityError : public DerivationFailure {
 public:
  using DerivationFailure::DerivationFailure;
};

class SearchFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedAdversary : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WrongProtocol : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Computed table rows drifted from the embedded reference rows.
class ReproductionFailure : public std::runtime_error {
 public:
  ReproductionFailure(const std::string& what, std::vector<std::string> diff)
      : std::runtime_error(what), diff_(std::move(diff)) {}

  const std::vector<std::string>& diff() const noexcept { return diff_; }

 private:
  std::vector<std::string> diff_;
};

}  // namespace esqkd
