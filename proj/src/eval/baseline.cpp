#include "cirsense/eval/baseline.hpp"

#include <limits>
#include <stdexcept>

#include "cirsense/binary_io.hpp"
#include "cirsense/serialization.hpp"

namespace cirsense::eval {

namespace {

constexpr char kMagic[] = "CIRSBASE";
constexpr std::uint32_t kVersion = 1;

}  // namespace

BaselineModel fit_baseline(std::span<const SensingSample> train, bool targets_only) {
  BaselineModel m;
  m.targets_only = targets_only;
  for (const auto& s : train) {
    if (targets_only && s.hypothesis != Hypothesis::kTarget) continue;
    if (m.features.empty()) {
      m.layout = s.features.layout;
      m.meta.features = s.features.options;
      m.meta.receiver_ids = s.link_ids;
    } else if (s.features.layout != m.layout) {
      throw ShapeError("fit_baseline: inconsistent feature layouts");
    }
    m.features.push_back(s.features.values);
    m.hypotheses.push_back(s.hypothesis);
    m.grid_indices.push_back(s.grid_index.value_or(-1));
    m.positions.push_back(s.position_m.value_or(Point{}));
  }
  if (m.features.empty()) throw std::invalid_argument("fit_baseline: empty training set");
  return m;
}

std::size_t nearest_index(const BaselineModel& model, const FeatureVector& query) {
  if (model.features.empty()) throw std::invalid_argument("baseline database is empty");
  if (query.layout != model.layout || query.values.size() != model.layout.size())
    throw ShapeError("baseline query layout does not match the database");
  const std::size_t n = query.values.size();
  const double* q = query.values.data();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < model.features.size(); ++i) {
    const double* f = model.features[i].data();
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = f[k] - q[k];
      d += t * t;
    }
    if (d < best_d || (d == best_d && model.grid_indices[i] < model.grid_indices[best])) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

Point baseline_predict(const BaselineModel& model, const FeatureVector& query) {
  return model.positions[nearest_index(model, query)];
}

Point baseline_predict(std::span<const SensingSample> train, const FeatureVector& query) {
  return baseline_predict(fit_baseline(train, true), query);
}

std::vector<std::uint8_t> encode_baseline(const BaselineModel& m) {
  const json header = {{"layout", m.layout},
                       {"targets_only", m.targets_only},
                       {"features", m.meta.features},
                       {"receiver_ids", m.meta.receiver_ids},
                       {"config_snapshot", m.meta.config_snapshot}};
  io::Writer w;
  w.raw(std::string_view(kMagic, 8));
  w.u32(kVersion);
  const std::string text = header.dump();
  w.str(text);
  w.u32(io::crc32({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}));
  const std::size_t start = w.size();
  w.u64(m.features.size());
  for (std::size_t i = 0; i < m.features.size(); ++i) {
    w.u8(static_cast<std::uint8_t>(m.hypotheses[i]));
    w.i32(m.grid_indices[i]);
    w.f64(m.positions[i].x);
    w.f64(m.positions[i].y);
    w.f64s(m.features[i]);
  }
  w.u32(io::crc32(std::span(w.bytes()).subspan(start)));
  return w.bytes();
}

BaselineModel decode_baseline(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "baseline checkpoint");
  if (r.raw(8) != std::string_view(kMagic, 8)) throw FormatError("not a baseline checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kVersion)
    throw FormatError("baseline checkpoint version " + std::to_string(version) + " unsupported");
  const std::string text = r.str();
  if (r.u32() != io::crc32({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}))
    throw FormatError("baseline checkpoint header checksum mismatch");
  BaselineModel m;
  try {
    const json h = json::parse(text);
    m.layout = h.at("layout").get<FeatureLayout>();
    m.targets_only = h.at("targets_only").get<bool>();
    m.meta.features = h.at("features").get<FeatureOptions>();
    m.meta.receiver_ids = h.at("receiver_ids").get<std::vector<int>>();
    m.meta.config_snapshot = h.value("config_snapshot", std::string{});
  } catch (const json::exception& e) {
    throw FormatError(std::string("baseline checkpoint header is malformed: ") + e.what());
  }
  const std::size_t start = r.position();
  const auto n = r.u64();
  const std::size_t entry = 1 + 4 + 16 + 8 * m.layout.size();
  if (n > r.remaining() / entry) throw FormatError("truncated baseline checkpoint: entries");
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto h = r.u8();
    if (h > 1) throw FormatError("baseline checkpoint: bad hypothesis byte");
    m.hypotheses.push_back(static_cast<Hypothesis>(h));
    m.grid_indices.push_back(r.i32());
    const double x = r.f64();
    const double y = r.f64();
    m.positions.push_back({x, y});
    std::vector<double> f(m.layout.size());
    r.f64s(f);
    m.features.push_back(std::move(f));
  }
  const auto payload = r.consumed_since(start);
  if (r.u32() != io::crc32(payload)) throw FormatError("baseline checkpoint entry checksum mismatch");
  if (r.remaining() != 0) throw FormatError("baseline checkpoint has trailing bytes");
  return m;
}

void save_baseline(const BaselineModel& model, const std::filesystem::path& path) {
  io::write_file(path, encode_baseline(model));
}

BaselineModel load_baseline(const std::filesystem::path& path) {
  return decode_baseline(io::read_file(path));
}

}  // namespace cirsense::eval
