#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace envnet {

/// A model was rejected; `violations()` lists every offending item.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "model rejected:";
    for (const auto& s : v) {
      out += "\n  - ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

/// An operation was called outside its stated preconditions.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (quadrature depth, truncation, budget, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace envnet
