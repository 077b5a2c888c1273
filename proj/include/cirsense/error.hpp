#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cirsense {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scene geometry that cannot produce a propagation model (co-located nodes).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated, corrupted or version-mismatched file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Shapes or layouts that do not line up (tensor shapes, feature layouts).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch, int step)
      : Error(what), epoch_(epoch), step_(step) {}
  int epoch() const noexcept { return epoch_; }
  int step() const noexcept { return step_; }

 private:
  int epoch_;
  int step_;
};

/// Invalid configuration. Carries every violated invariant, not just the first.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Collects invariant violations and throws a single ConfigError at the end.
class Violations {
 public:
  void require(bool ok, std::string message) {
    if (!ok) items_.push_back(std::move(message));
  }
  void merge(const Violations& other, const std::string& prefix = {});
  bool empty() const noexcept { return items_.empty(); }
  const std::vector<std::string>& items() const noexcept { return items_; }
  void throw_if_any() const;

 private:
  std::vector<std::string> items_;
};

}  // namespace cirsense
