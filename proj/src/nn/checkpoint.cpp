#include "cirsense/nn/checkpoint.hpp"

#include "cirsense/binary_io.hpp"
#include "cirsense/serialization.hpp"

namespace cirsense::nn {

namespace {

constexpr char kMagic[] = "CIRSNNET";

json layer_json(const LayerSpec& l) {
  json j = {{"kind", std::string(to_string(l.kind))}};
  switch (l.kind) {
    case LayerKind::kConv1d:
      j["out_channels"] = l.out_channels;
      j["kernel"] = l.kernel;
      j["stride"] = l.stride;
      j["padding"] = l.padding;
      break;
    case LayerKind::kMaxPool:
      j["size"] = l.pool_size;
      j["stride"] = l.pool_stride;
      break;
    case LayerKind::kDense:
      j["out_units"] = l.out_units;
      break;
    default:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const json& j) {
  LayerSpec l;
  l.kind = parse_layer_kind(j.at("kind").get<std::string>());
  switch (l.kind) {
    case LayerKind::kConv1d:
      l.out_channels = j.at("out_channels").get<int>();
      l.kernel = j.at("kernel").get<int>();
      l.stride = j.value("stride", 1);
      l.padding = j.value("padding", 0);
      break;
    case LayerKind::kMaxPool:
      l.pool_size = j.at("size").get<int>();
      l.pool_stride = j.value("stride", l.pool_size);
      break;
    case LayerKind::kDense:
      l.out_units = j.at("out_units").get<int>();
      break;
    default:
      break;
  }
  return l;
}

}  // namespace

json spec_to_json(const NetworkSpec& s) {
  json pipe = json::array();
  for (const auto& l : s.per_pipeline) pipe.push_back(layer_json(l));
  json head = json::array();
  for (const auto& l : s.fusion_head) head.push_back(layer_json(l));
  return {{"variant", std::string(to_string(s.variant))},
          {"num_links", s.num_links},
          {"channels_per_link", s.channels_per_link},
          {"input_length", s.input_length},
          {"per_pipeline", pipe},
          {"fusion_head", head},
          {"task", std::string(to_string(s.task))},
          {"loss", std::string(to_string(s.loss))}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.variant = parse_variant(j.at("variant").get<std::string>());
  s.num_links = j.at("num_links").get<int>();
  s.channels_per_link = j.at("channels_per_link").get<int>();
  s.input_length = j.at("input_length").get<int>();
  for (const auto& l : j.at("per_pipeline")) s.per_pipeline.push_back(layer_from_json(l));
  for (const auto& l : j.at("fusion_head")) s.fusion_head.push_back(layer_from_json(l));
  s.task = parse_task(j.at("task").get<std::string>());
  s.loss = parse_loss(j.at("loss").get<std::string>());
  return s;
}

std::vector<std::uint8_t> encode_checkpoint(const NnCheckpoint& ckpt) {
  const auto& m = ckpt.model;
  json header = {{"spec", spec_to_json(m.spec)},
                 {"hyper",
                  {{"epochs", m.hyper.epochs},
                   {"batch_size", m.hyper.batch_size},
                   {"learning_rate", m.hyper.learning_rate},
                   {"patience", m.hyper.patience},
                   {"seed", m.hyper.seed}}},
                 {"curves",
                  {{"train_loss", m.curves.train_loss},
                   {"val_loss", m.curves.val_loss},
                   {"best_epoch", m.curves.best_epoch}}},
                 {"features", ckpt.meta.features},
                 {"receiver_ids", ckpt.meta.receiver_ids},
                 {"config_snapshot", ckpt.meta.config_snapshot}};
  io::Writer w;
  w.raw(std::string_view(kMagic, 8));
  w.u32(kCheckpointVersion);
  const std::string text = header.dump();
  w.str(text);
  w.u32(io::crc32({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}));
  w.u64(m.params.size());
  const std::size_t start = w.size();
  w.f64s(m.params);
  w.u32(io::crc32(std::span(w.bytes()).subspan(start)));
  return w.bytes();
}

NnCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "network checkpoint");
  if (r.raw(8) != std::string_view(kMagic, 8)) throw FormatError("not a network checkpoint (bad magic)");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    throw FormatError("network checkpoint version " + std::to_string(version) + " unsupported");
  const std::string text = r.str();
  if (r.u32() != io::crc32({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}))
    throw FormatError("network checkpoint header checksum mismatch");

  NnCheckpoint c;
  try {
    const json h = json::parse(text);
    c.model.spec = spec_from_json(h.at("spec"));
    const auto& hy = h.at("hyper");
    c.model.hyper.epochs = hy.at("epochs").get<int>();
    c.model.hyper.batch_size = hy.at("batch_size").get<int>();
    c.model.hyper.learning_rate = hy.at("learning_rate").get<double>();
    c.model.hyper.patience = hy.at("patience").get<int>();
    c.model.hyper.seed = hy.at("seed").get<std::uint64_t>();
    const auto& cu = h.at("curves");
    c.model.curves.train_loss = cu.at("train_loss").get<std::vector<double>>();
    c.model.curves.val_loss = cu.at("val_loss").get<std::vector<double>>();
    c.model.curves.best_epoch = cu.at("best_epoch").get<int>();
    c.meta.features = h.at("features").get<FeatureOptions>();
    c.meta.receiver_ids = h.at("receiver_ids").get<std::vector<int>>();
    c.meta.config_snapshot = h.value("config_snapshot", std::string{});
  } catch (const json::exception& e) {
    throw FormatError(std::string("network checkpoint header is malformed: ") + e.what());
  }

  const auto n = r.u64();
  if (n > r.remaining() / 8) throw FormatError("truncated network checkpoint: parameters");
  const std::size_t start = r.position();
  c.model.params.resize(static_cast<std::size_t>(n));
  r.f64s(c.model.params);
  const auto payload = r.consumed_since(start);
  if (r.u32() != io::crc32(payload)) throw FormatError("network checkpoint parameter checksum mismatch");
  if (Network(c.model.spec).parameter_count() != c.model.params.size())
    throw FormatError("network checkpoint parameter count does not match its architecture");
  return c;
}

void save_checkpoint(const NnCheckpoint& ckpt, const std::filesystem::path& path) {
  io::write_file(path, encode_checkpoint(ckpt));
}

NnCheckpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(io::read_file(path));
}

}  // namespace cirsense::nn
