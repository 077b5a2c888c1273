#include "cirsense/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "cirsense/binary_io.hpp"
#include "cirsense/parallel.hpp"
#include "cirsense/seed.hpp"
#include "cirsense/serialization.hpp"

namespace cirsense {

Violations GridSpec::check() const {
  Violations v;
  v.require(n_cols >= 1 && n_rows >= 1, "grid dimensions must be >= 1");
  v.require(std::isfinite(cell_m) && cell_m > 0, "grid.cell_m must be > 0");
  if (expected_points)
    v.require(n_cols * n_rows == *expected_points,
              "grid n_cols*n_rows (" + std::to_string(n_cols) + "x" + std::to_string(n_rows) + "=" +
                  std::to_string(n_cols * n_rows) + ") must equal expected_points (" +
                  std::to_string(*expected_points) + ")");
  return v;
}

Point grid_to_position(const GridSpec& grid, int index) {
  if (index < 0 || index >= grid.size())
    throw std::out_of_range("grid index " + std::to_string(index) + " outside [0, " +
                            std::to_string(grid.size()) + ")");
  const int row = index / grid.n_cols;
  const int col = index % grid.n_cols;
  return {grid.origin.x + (col + 0.5) * grid.cell_m, grid.origin.y + (row + 0.5) * grid.cell_m};
}

int position_to_grid(const GridSpec& grid, Point p) {
  const double cx = (p.x - grid.origin.x) / grid.cell_m;
  const double cy = (p.y - grid.origin.y) / grid.cell_m;
  const int col = static_cast<int>(std::floor(cx));
  const int row = static_cast<int>(std::floor(cy));
  if (col < 0 || col >= grid.n_cols || row < 0 || row >= grid.n_rows)
    throw std::out_of_range("position outside grid");
  return row * grid.n_cols + col;
}

Violations CampaignSpec::check() const {
  Violations v;
  v.merge(grid.check());
  v.merge(sweep.check());
  v.merge(scene_template.check());
  v.require(scene_template.target.has_value(), "scene template needs a target body model");
  v.require(scene_template.rx_positions.size() == receiver_ids.size(),
            "receiver_ids must name every receiver of the scene");
  v.require(augmentation >= 1, "augmentation must be >= 1");
  v.require(features.k_taps >= 1 && features.k_taps <= sweep.num_points,
            "features.k_taps must be in [1, sweep.num_points]");
  return v;
}

FeatureVector scene_features(const Scene& scene, const SweepConfig& sweep,
                             const FeatureOptions& opts) {
  const auto sweeps = synthesize_scene_sweeps(scene, sweep);
  std::vector<Cir> cirs;
  cirs.reserve(sweeps.size());
  for (const auto& s : sweeps) cirs.push_back(cir_from_sweep(s));
  return features_from_cirs(cirs, opts);
}

std::vector<SensingSample> generate_campaign(const CampaignSpec& spec) {
  spec.check().throw_if_any();
  const int bins = spec.grid.size();
  const int per_bin = 2 * spec.augmentation;
  std::vector<SensingSample> out(static_cast<std::size_t>(bins * per_bin));

  parallel_for(static_cast<std::size_t>(bins), [&](std::size_t b) {
    const int bin = static_cast<int>(b);
    const Point where = grid_to_position(spec.grid, bin);
    for (int h = 0; h < 2; ++h) {
      for (int a = 0; a < spec.augmentation; ++a) {
        Scene scene = spec.scene_template;
        if (h == 1)
          scene.target->position = where;
        else
          scene.target.reset();
        scene.seed = derive_seed(spec.seed, {b, static_cast<std::uint64_t>(h),
                                             static_cast<std::uint64_t>(a)});
        SensingSample s;
        s.features = scene_features(scene, spec.sweep, spec.features);
        s.hypothesis = h == 1 ? Hypothesis::kTarget : Hypothesis::kNull;
        s.bin = bin;
        if (h == 1) {
          s.grid_index = bin;
          s.position_m = where;
        }
        s.link_ids = spec.receiver_ids;
        s.seed = scene.seed;
        out[b * per_bin + h * spec.augmentation + a] = std::move(s);
      }
    }
  });
  return out;
}

Dataset make_dataset(const CampaignSpec& spec, std::string config_snapshot) {
  Dataset d;
  d.samples = generate_campaign(spec);
  d.info.grid = spec.grid;
  d.info.sweep = spec.sweep;
  d.info.features = spec.features;
  d.info.layout = {static_cast<int>(spec.receiver_ids.size()),
                   spec.features.mode == FeatureMode::kMagnitude ? 1 : 2, spec.features.k_taps};
  d.info.receiver_ids = spec.receiver_ids;
  d.info.seed = spec.seed;
  d.info.augmentation = spec.augmentation;
  d.info.config_snapshot = std::move(config_snapshot);
  return d;
}

SplitSpec make_random_split(int grid_size, int n_test, double val_fraction, std::uint64_t seed) {
  if (n_test < 0 || n_test > grid_size)
    throw ConfigError({"split.test_bins must be within [0, grid size]"});
  std::vector<int> bins(static_cast<std::size_t>(grid_size));
  std::iota(bins.begin(), bins.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, {0x5B1u}));
  std::shuffle(bins.begin(), bins.end(), rng);
  SplitSpec s;
  s.test_bins.assign(bins.begin(), bins.begin() + n_test);
  s.train_bins.assign(bins.begin() + n_test, bins.end());
  std::sort(s.test_bins.begin(), s.test_bins.end());
  std::sort(s.train_bins.begin(), s.train_bins.end());
  s.val_fraction = val_fraction;
  s.seed = seed;
  return s;
}

CampaignSplit split_campaign(const std::vector<SensingSample>& samples, const SplitSpec& spec,
                             int grid_size) {
  Violations v;
  std::set<int> train(spec.train_bins.begin(), spec.train_bins.end());
  std::set<int> test(spec.test_bins.begin(), spec.test_bins.end());
  v.require(train.size() == spec.train_bins.size(), "split.train_bins has duplicates");
  v.require(test.size() == spec.test_bins.size(), "split.test_bins has duplicates");
  std::vector<int> overlap;
  std::set_intersection(train.begin(), train.end(), test.begin(), test.end(),
                        std::back_inserter(overlap));
  v.require(overlap.empty(), "split train and test bins overlap (" +
                                 std::to_string(overlap.size()) + " shared bins)");
  v.require(train.size() + test.size() == static_cast<std::size_t>(grid_size),
            "split bins must cover the grid exactly (" +
                std::to_string(train.size() + test.size()) + " != " + std::to_string(grid_size) + ")");
  v.require(spec.val_fraction >= 0 && spec.val_fraction < 1, "split.val_fraction must be in [0, 1)");
  for (int b : train) v.require(b >= 0 && b < grid_size, "split bin out of range");
  for (int b : test) v.require(b >= 0 && b < grid_size, "split bin out of range");
  v.throw_if_any();

  std::vector<int> train_order(train.begin(), train.end());
  std::mt19937_64 rng(derive_seed(spec.seed, {0x7A1u}));
  std::shuffle(train_order.begin(), train_order.end(), rng);
  const auto n_val = static_cast<std::size_t>(
      std::floor(spec.val_fraction * static_cast<double>(train_order.size())));
  std::set<int> val(train_order.begin(), train_order.begin() + static_cast<std::ptrdiff_t>(n_val));

  CampaignSplit out;
  for (int b : train)
    (val.count(b) ? out.val_bins : out.train_bins).push_back(b);
  out.test_bins.assign(test.begin(), test.end());

  for (const auto& s : samples) {
    if (test.count(s.bin))
      out.test.push_back(s);
    else if (val.count(s.bin))
      out.val.push_back(s);
    else if (train.count(s.bin))
      out.train.push_back(s);
    else
      throw ConfigError({"sample bin " + std::to_string(s.bin) + " is in no split partition"});
  }
  return out;
}

namespace {

constexpr char kDatasetMagic[] = "CIRSDSET";

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& dataset) {
  io::Writer w;
  w.raw(std::string_view(kDatasetMagic, 8));
  w.u32(kDatasetFormatVersion);

  json header = dataset.info;
  header["sample_count"] = dataset.samples.size();
  const std::string header_text = header.dump();
  w.str(header_text);
  w.u32(io::crc32({reinterpret_cast<const std::uint8_t*>(header_text.data()), header_text.size()}));

  const std::size_t records_start = w.size();
  for (const auto& s : dataset.samples) {
    w.u8(static_cast<std::uint8_t>(s.hypothesis));
    w.i32(s.bin);
    w.i32(s.grid_index.value_or(-1));
    w.u8(s.position_m ? 1 : 0);
    const Point p = s.position_m.value_or(Point{});
    w.f64(p.x);
    w.f64(p.y);
    w.u64(s.seed);
    w.u32(static_cast<std::uint32_t>(s.link_ids.size()));
    for (int id : s.link_ids) w.i32(id);
    w.u64(s.features.values.size());
    w.f64s(s.features.values);
  }
  const auto& bytes = w.bytes();
  w.u32(io::crc32(std::span(bytes).subspan(records_start)));
  return w.bytes();
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "dataset");
  if (r.raw(8) != std::string_view(kDatasetMagic, 8))
    throw FormatError("not a cirsense dataset (bad magic)");
  const auto version = r.u32();
  if (version != kDatasetFormatVersion)
    throw FormatError("dataset format version " + std::to_string(version) + " unsupported (expected " +
                      std::to_string(kDatasetFormatVersion) + ")");
  const std::string header_text = r.str();
  const auto header_crc = r.u32();
  if (header_crc !=
      io::crc32({reinterpret_cast<const std::uint8_t*>(header_text.data()), header_text.size()}))
    throw FormatError("dataset header checksum mismatch");

  Dataset d;
  std::size_t count = 0;
  try {
    const json header = json::parse(header_text);
    d.info = header.get<DatasetInfo>();
    count = header.at("sample_count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("dataset header is malformed: ") + e.what());
  }

  const std::size_t records_start = r.position();
  d.samples.reserve(std::min<std::size_t>(count, r.remaining()));
  for (std::size_t i = 0; i < count; ++i) {
    SensingSample s;
    const auto hyp = r.u8();
    if (hyp > 1) throw FormatError("dataset record " + std::to_string(i) + ": bad hypothesis");
    s.hypothesis = static_cast<Hypothesis>(hyp);
    s.bin = r.i32();
    const auto gi = r.i32();
    if (gi >= 0) s.grid_index = gi;
    const bool has_pos = r.u8() != 0;
    const Point p{r.f64(), r.f64()};
    if (has_pos) s.position_m = p;
    s.seed = r.u64();
    const auto n_links = r.u32();
    if (n_links > r.remaining()) throw FormatError("truncated dataset: link list");
    s.link_ids.resize(n_links);
    for (auto& id : s.link_ids) id = r.i32();
    const auto n_values = r.u64();
    if (n_values > r.remaining() / 8) throw FormatError("truncated dataset: feature values");
    s.features.values.resize(static_cast<std::size_t>(n_values));
    r.f64s(s.features.values);
    s.features.layout = d.info.layout;
    s.features.options = d.info.features;
    d.samples.push_back(std::move(s));
  }
  const auto payload = r.consumed_since(records_start);
  const auto crc = r.u32();
  if (crc != io::crc32(payload)) throw FormatError("dataset record checksum mismatch");
  if (r.remaining() != 0) throw FormatError("trailing bytes after dataset records");
  return d;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  io::write_file(path, encode_dataset(dataset));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(io::read_file(path)); }

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

FrequencySweep parse_sweep_trace(std::string_view text, const SweepConfig& cfg, int link_id) {
  FrequencySweep sweep;
  sweep.config = cfg;
  sweep.link_id = link_id;
  std::vector<double> freqs;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    double v[3];
    std::size_t k = 0;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t')) ++i;
      if (i >= line.size()) break;
      if (k == 3) throw FormatError("trace line " + std::to_string(line_no) + ": more than 3 fields");
      const auto res = std::from_chars(line.data() + i, line.data() + line.size(), v[k]);
      if (res.ec != std::errc() || (res.ptr != line.data() + line.size() && *res.ptr != ',' &&
                                    *res.ptr != ' ' && *res.ptr != '\t'))
        throw FormatError("trace line " + std::to_string(line_no) + ": malformed number");
      i = static_cast<std::size_t>(res.ptr - line.data());
      ++k;
    }
    if (k != 3)
      throw FormatError("trace line " + std::to_string(line_no) +
                        ": expected 3 fields (frequency_hz, real, imag)");
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[2]))
      throw FormatError("trace line " + std::to_string(line_no) + ": non-finite value");
    if (!freqs.empty() && !(v[0] > freqs.back()))
      throw FormatError("trace line " + std::to_string(line_no) +
                        ": frequency grid is not strictly increasing");
    freqs.push_back(v[0]);
    sweep.samples.emplace_back(v[1], v[2]);
  }

  if (freqs.size() != static_cast<std::size_t>(cfg.num_points))
    throw FormatError("trace has " + std::to_string(freqs.size()) + " points, sweep config expects " +
                      std::to_string(cfg.num_points));
  const double tol = 1e-6 * cfg.frequency_step_hz();
  for (int i = 0; i < cfg.num_points; ++i) {
    if (std::abs(freqs[static_cast<std::size_t>(i)] - cfg.frequency(i)) > tol)
      throw FormatError("trace frequency grid mismatch at point " + std::to_string(i + 1));
  }
  return sweep;
}

std::string format_sweep_trace(const FrequencySweep& sweep) {
  std::string out = "# frequency_hz,real,imag\n";
  char buf[128];
  for (std::size_t i = 0; i < sweep.samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", sweep.config.frequency(static_cast<int>(i)),
                  sweep.samples[i].real(), sweep.samples[i].imag());
    out += buf;
  }
  return out;
}

void export_sweep_trace(const FrequencySweep& sweep, const std::filesystem::path& path) {
  io::write_text(path, format_sweep_trace(sweep));
}

std::vector<FrequencySweep> import_sweep_traces(const std::filesystem::path& path,
                                                const SweepConfig& cfg) {
  cfg.validate();
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<FrequencySweep> out;
  for (std::size_t k = 0; k < files.size(); ++k) {
    try {
      out.push_back(parse_sweep_trace(io::read_text(files[k]), cfg, static_cast<int>(k)));
    } catch (const FormatError& e) {
      throw FormatError(files[k].filename().string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace cirsense
