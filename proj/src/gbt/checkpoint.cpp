#include "cirsense/gbt/checkpoint.hpp"

#include "cirsense/binary_io.hpp"
#include "cirsense/serialization.hpp"

namespace cirsense::gbt {

namespace {

constexpr char kMagic[] = "CIRSGBTE";

json config_json(const BoostConfig& c) {
  return {{"n_estimators", c.n_estimators},
          {"max_depth", c.max_depth},
          {"learning_rate", c.learning_rate},
          {"lambda", c.lambda},
          {"gamma", c.gamma},
          {"n_quantile_candidates", c.n_quantile_candidates},
          {"subsample", c.subsample},
          {"seed", c.seed}};
}

BoostConfig config_from_json(const json& j) {
  BoostConfig c;
  c.n_estimators = j.at("n_estimators").get<int>();
  c.max_depth = j.at("max_depth").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.n_quantile_candidates = j.at("n_quantile_candidates").get<int>();
  c.subsample = j.at("subsample").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void check_tree(const Tree& t) {
  const int n = static_cast<int>(t.nodes.size());
  if (n == 0) throw FormatError("gbt checkpoint: empty tree");
  for (int i = 0; i < n; ++i) {
    const auto& node = t.nodes[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (node.right >= 0) throw FormatError("gbt checkpoint: leaf with a right child");
      continue;
    }
    // children always come later in depth-first order, so this also rules out cycles
    if (node.left <= i || node.right <= i || node.left >= n || node.right >= n)
      throw FormatError("gbt checkpoint: bad child reference at node " + std::to_string(i));
    if (node.feature_index < 0) throw FormatError("gbt checkpoint: negative feature index");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const GbtCheckpoint& ckpt) {
  const auto& e = ckpt.ensemble;
  json table = json::array();
  for (const auto& s : ckpt.grid_table)
    table.push_back({{"n_estimators", s.n_estimators},
                     {"max_depth", s.max_depth},
                     {"learning_rate", s.learning_rate},
                     {"val_mse", s.val_mse}});
  json header = {{"config", config_json(e.config)},
                 {"objective", std::string(to_string(e.objective))},
                 {"n_features", e.n_features},
                 {"base_score", e.base_score},
                 {"train_loss", e.train_loss},
                 {"grid_table", table},
                 {"features", ckpt.meta.features},
                 {"receiver_ids", ckpt.meta.receiver_ids},
                 {"config_snapshot", ckpt.meta.config_snapshot}};
  io::Writer w;
  w.raw(std::string_view(kMagic, 8));
  w.u32(kCheckpointVersion);
  const std::string text = header.dump();
  w.str(text);
  w.u32(io::crc32({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}));
  const std::size_t start = w.size();
  for (const auto& trees : e.trees_per_output) {
    w.u64(trees.size());
    for (const auto& t : trees) {
      w.u32(static_cast<std::uint32_t>(t.nodes.size()));
      for (const auto& n : t.nodes) {
        w.i32(n.feature_index);
        w.f64(n.threshold);
        w.i32(n.left);
        w.i32(n.right);
        w.f64(n.leaf_weight);
        w.u8(n.default_left ? 1 : 0);
      }
    }
  }
  w.u32(io::crc32(std::span(w.bytes()).subspan(start)));
  return w.bytes();
}

GbtCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "gbt checkpoint");
  if (r.raw(8) != std::string_view(kMagic, 8)) throw FormatError("not a gbt checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw FormatError("gbt checkpoint version " + std::to_string(version) + " unsupported");
  const std::string text = r.str();
  if (r.u32() != io::crc32({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}))
    throw FormatError("gbt checkpoint header checksum mismatch");

  GbtCheckpoint c;
  auto& e = c.ensemble;
  try {
    const json h = json::parse(text);
    e.config = config_from_json(h.at("config"));
    e.objective = parse_objective(h.value("objective", std::string("squared")));
    e.n_features = h.at("n_features").get<int>();
    e.base_score = h.at("base_score").get<std::vector<double>>();
    e.train_loss = h.at("train_loss").get<std::vector<std::vector<double>>>();
    for (const auto& s : h.at("grid_table"))
      c.grid_table.push_back({s.at("n_estimators").get<int>(), s.at("max_depth").get<int>(),
                              s.at("learning_rate").get<double>(), s.at("val_mse").get<double>()});
    c.meta.features = h.at("features").get<FeatureOptions>();
    c.meta.receiver_ids = h.at("receiver_ids").get<std::vector<int>>();
    c.meta.config_snapshot = h.value("config_snapshot", std::string{});
  } catch (const json::exception& ex) {
    throw FormatError(std::string("gbt checkpoint header is malformed: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw FormatError(std::string("gbt checkpoint header is malformed: ") + ex.what());
  }

  const std::size_t start = r.position();
  constexpr std::size_t kNodeBytes = 4 + 8 + 4 + 4 + 8 + 1;
  e.trees_per_output.resize(e.base_score.size());
  for (auto& trees : e.trees_per_output) {
    const auto count = r.u64();
    if (count > r.remaining() / 4) throw FormatError("truncated gbt checkpoint: tree list");
    trees.resize(static_cast<std::size_t>(count));
    for (auto& t : trees) {
      const auto nodes = r.u32();
      if (nodes > r.remaining() / kNodeBytes) throw FormatError("truncated gbt checkpoint: nodes");
      t.nodes.resize(nodes);
      for (auto& n : t.nodes) {
        n.feature_index = r.i32();
        n.threshold = r.f64();
        n.left = r.i32();
        n.right = r.i32();
        n.leaf_weight = r.f64();
        n.default_left = r.u8() != 0;
      }
      check_tree(t);
      for (const auto& n : t.nodes)
        if (!n.is_leaf() && n.feature_index >= e.n_features)
          throw FormatError("gbt checkpoint: feature index out of range");
    }
  }
  const auto payload = r.consumed_since(start);
  if (r.u32() != io::crc32(payload)) throw FormatError("gbt checkpoint tree checksum mismatch");
  if (r.remaining() != 0) throw FormatError("gbt checkpoint has trailing bytes");
  for (const auto& trees : e.trees_per_output)
    if (trees.size() != e.trees_per_output.front().size())
      throw FormatError("gbt checkpoint: unequal tree counts per output");
  return c;
}

void save_checkpoint(const GbtCheckpoint& ckpt, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(ckpt));
}

GbtCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace cirsense::gbt
