#include "cirsense/error.hpp"

namespace cirsense {

namespace {
std::string join(const std::vector<std::string>& items) {
  std::string out = "invalid configuration:";
  for (std::size_t i = 0; i < items.size(); ++i) {
    out += (i == 0 ? " " : "; ");
    out += items[i];
  }
  return out;
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

void Violations::merge(const Violations& other, const std::string& prefix) {
  for (const auto& v : other.items_) items_.push_back(prefix + v);
}

void Violations::throw_if_any() const {
  if (!items_.empty()) throw ConfigError(items_);
}

}  // namespace cirsense
