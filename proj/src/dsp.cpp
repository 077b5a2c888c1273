#include "cirsense/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace cirsense {

namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is. FFTW_ESTIMATE keeps the chosen algorithm (and so the output
// bits) independent of timing measurements.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find({n, sign});
    if (it != plans_.end()) return it->second;
    std::vector<Complex> in(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n));
    fftw_plan plan = fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw std::runtime_error("fftw planning failed for n=" + std::to_string(n));
    plans_.emplace(std::make_pair(n, sign), plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

std::vector<Complex> transform(std::span<const Complex> x, int sign) {
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out(x.size());
  if (x.empty()) return out;
  fftw_plan plan = plan_cache().get(static_cast<int>(x.size()), sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::string_view to_string(FeatureMode m) {
  return m == FeatureMode::kMagnitude ? "magnitude" : "real-imag";
}

std::string_view to_string(Normalization n) {
  return n == Normalization::kPerLinkMax ? "per-link-max" : "none";
}

FeatureMode parse_feature_mode(std::string_view s) {
  if (s == "magnitude") return FeatureMode::kMagnitude;
  if (s == "real-imag") return FeatureMode::kRealImag;
  throw std::invalid_argument("unknown feature mode '" + std::string(s) + "'");
}

Normalization parse_normalization(std::string_view s) {
  if (s == "per-link-max") return Normalization::kPerLinkMax;
  if (s == "none") return Normalization::kNone;
  throw std::invalid_argument("unknown normalization '" + std::string(s) + "'");
}

std::span<const double> FeatureVector::link(int l) const {
  const std::size_t per_link =
      static_cast<std::size_t>(layout.channels_per_link) * static_cast<std::size_t>(layout.length);
  return std::span<const double>(values).subspan(static_cast<std::size_t>(l) * per_link, per_link);
}

std::vector<Complex> forward_dft(std::span<const Complex> x) { return transform(x, FFTW_FORWARD); }

std::vector<Complex> inverse_dft(std::span<const Complex> x) {
  auto out = transform(x, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

Cir cir_from_sweep(const FrequencySweep& sweep) {
  return Cir{inverse_dft(sweep.samples), sweep.config.bin_spacing_s(), sweep.link_id};
}

FeatureVector features_from_cirs(std::span<const Cir> cirs, const FeatureOptions& opts) {
  if (cirs.empty()) throw std::invalid_argument("features_from_cirs: no CIRs");
  const std::size_t n = cirs.front().taps.size();
  for (const auto& c : cirs)
    if (c.taps.size() != n) throw ShapeError("features_from_cirs: CIR lengths differ");
  if (opts.k_taps <= 0 || static_cast<std::size_t>(opts.k_taps) > n)
    throw std::invalid_argument("features_from_cirs: k_taps must be in [1, N]");

  const auto k = static_cast<std::size_t>(opts.k_taps);
  const int cpl = opts.mode == FeatureMode::kMagnitude ? 1 : 2;

  FeatureVector fv;
  fv.options = opts;
  fv.layout = {static_cast<int>(cirs.size()), cpl, opts.k_taps};
  fv.values.reserve(fv.layout.size());

  for (const auto& c : cirs) {
    const auto begin = fv.values.size();
    double peak = 0.0;
    for (std::size_t b = 0; b < k; ++b) peak = std::max(peak, std::abs(c.taps[b]));
    if (opts.mode == FeatureMode::kMagnitude) {
      for (std::size_t b = 0; b < k; ++b) fv.values.push_back(std::abs(c.taps[b]));
    } else {
      for (std::size_t b = 0; b < k; ++b) fv.values.push_back(c.taps[b].real());
      for (std::size_t b = 0; b < k; ++b) fv.values.push_back(c.taps[b].imag());
    }
    if (opts.normalize == Normalization::kPerLinkMax && peak > 0.0)
      for (std::size_t i = begin; i < fv.values.size(); ++i) fv.values[i] /= peak;
  }
  return fv;
}

FeatureVector select_links(const FeatureVector& fv, std::span<const int> link_positions) {
  FeatureVector out;
  out.options = fv.options;
  out.layout = fv.layout;
  out.layout.num_links = static_cast<int>(link_positions.size());
  out.values.reserve(out.layout.size());
  for (int l : link_positions) {
    if (l < 0 || l >= fv.layout.num_links)
      throw ShapeError("select_links: link position " + std::to_string(l) + " out of range");
    const auto src = fv.link(l);
    out.values.insert(out.values.end(), src.begin(), src.end());
  }
  return out;
}

}  // namespace cirsense
