#include "cirsense/eval/combo.hpp"

#include <algorithm>
#include <stdexcept>

namespace cirsense::eval {

std::string LinkCombo::name() const {
  std::string s = "N";
  for (int id : receiver_ids) s += std::to_string(id);
  return s;
}

LinkCombo LinkCombo::from_ids(std::vector<int> ids) {
  if (ids.empty()) throw std::invalid_argument("link combo needs at least one receiver");
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (int id : ids)
    if (id < 0) throw std::invalid_argument("receiver ids must be non-negative");
  return LinkCombo{std::move(ids)};
}

LinkCombo LinkCombo::parse(std::string_view text) {
  std::string_view t = text;
  if (!t.empty() && (t.front() == 'N' || t.front() == 'n')) t.remove_prefix(1);
  std::vector<int> ids;
  const bool separated = t.find_first_of(",+ ") != std::string_view::npos;
  int current = -1;
  for (char c : t) {
    if (c >= '0' && c <= '9') {
      if (separated) {
        current = (current < 0 ? 0 : current * 10) + (c - '0');
      } else {
        ids.push_back(c - '0');  // "N234": one digit per receiver
      }
    } else if (separated && (c == ',' || c == '+' || c == ' ')) {
      if (current >= 0) ids.push_back(current);
      current = -1;
    } else {
      throw std::invalid_argument("bad link combo '" + std::string(text) + "'");
    }
  }
  if (current >= 0) ids.push_back(current);
  if (ids.empty()) throw std::invalid_argument("bad link combo '" + std::string(text) + "'");
  return from_ids(std::move(ids));
}

std::vector<LinkCombo> all_combos(std::span<const int> receivers) {
  std::vector<int> ids(receivers.begin(), receivers.end());
  std::sort(ids.begin(), ids.end());
  const int n = static_cast<int>(ids.size());
  if (n > 20) throw std::invalid_argument("too many receivers for an exhaustive combo sweep");
  std::vector<LinkCombo> out;
  for (int size = 1; size <= n; ++size) {
    // subsets of this size in lexicographic order of their ids
    std::vector<int> pick(static_cast<std::size_t>(size));
    for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
      LinkCombo c;
      for (int i : pick) c.receiver_ids.push_back(ids[static_cast<std::size_t>(i)]);
      out.push_back(std::move(c));
      int k = size - 1;
      while (k >= 0 && pick[static_cast<std::size_t>(k)] == n - size + k) --k;
      if (k < 0) break;
      ++pick[static_cast<std::size_t>(k)];
      for (int j = k + 1; j < size; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  return out;
}

std::vector<LinkCombo> parse_combo_list(std::string_view text) {
  std::vector<LinkCombo> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      auto combo = LinkCombo::parse(item);
      if (std::find(out.begin(), out.end(), combo) == out.end()) out.push_back(std::move(combo));
    }
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty combo list");
  return out;
}

std::vector<int> link_positions(std::span<const int> combo_ids, std::span<const int> available) {
  std::vector<int> pos;
  for (int id : combo_ids) {
    const auto it = std::find(available.begin(), available.end(), id);
    if (it == available.end())
      throw std::invalid_argument("receiver " + std::to_string(id) + " is not in the dataset");
    pos.push_back(static_cast<int>(it - available.begin()));
  }
  return pos;
}

std::vector<SensingSample> restrict_links(std::span<const SensingSample> samples,
                                          std::span<const int> combo_ids) {
  std::vector<SensingSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto pos = link_positions(combo_ids, s.link_ids);
    SensingSample r = s;
    r.features = select_links(s.features, pos);
    r.link_ids.assign(combo_ids.begin(), combo_ids.end());
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cirsense::eval
