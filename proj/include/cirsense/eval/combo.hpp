#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cirsense/dataset.hpp"

namespace cirsense::eval {

/// A subset of receivers, named "N" + ids ("N2", "N24", "N234").
struct LinkCombo {
  std::vector<int> receiver_ids;

  std::string name() const;
  /// Accepts "N24", "24" or "2,4"-style lists; ids are sorted and deduplicated.
  static LinkCombo parse(std::string_view text);
  static LinkCombo from_ids(std::vector<int> ids);

  friend bool operator==(const LinkCombo&, const LinkCombo&) = default;
};

/// All non-empty subsets of `receivers`, singles first, then pairs, ...
std::vector<LinkCombo> all_combos(std::span<const int> receivers);
std::vector<LinkCombo> parse_combo_list(std::string_view comma_separated);

/// Index of each combo receiver within `available` (the dataset link order).
/// Throws std::invalid_argument when a receiver is not available.
std::vector<int> link_positions(std::span<const int> combo_ids, std::span<const int> available);

/// Copies of `samples` whose features keep only the given receivers.
std::vector<SensingSample> restrict_links(std::span<const SensingSample> samples,
                                          std::span<const int> combo_ids);

}  // namespace cirsense::eval
