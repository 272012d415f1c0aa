#include "badtime/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace badtime {

namespace {

struct Tone {
  double amplitude;
  double period;
  double phase;

  double at(double t) const {
    return amplitude * std::sin(2.0 * std::numbers::pi * t / period + phase);
  }
};

constexpr std::array<double, 3> kPeriods{24.0, 37.0, 61.0};
constexpr double kScaleLo = 0.8;
constexpr double kScaleHi = 1.2;
constexpr double kTexturePhi = 0.9;
constexpr double kTextureStd = 0.3;

std::vector<Tone> draw_tones(std::mt19937_64& rng, int count, double scale) {
  std::uniform_real_distribution<double> amp(0.5, 1.5);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::array<double, 3> periods = kPeriods;
  std::shuffle(periods.begin(), periods.end(), rng);
  std::vector<Tone> tones;
  for (int k = 0; k < count; ++k) {
    const double a = amp(rng);
    const double ph = phase(rng);
    tones.push_back({a, periods[static_cast<std::size_t>(k)] * scale, ph});
  }
  return tones;
}

// Stationary AR(1) over `len` steps.
Vector texture(std::mt19937_64& rng, Index len) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const double innov = kTextureStd * std::sqrt(1.0 - kTexturePhi * kTexturePhi);
  Vector z(len);
  double prev = kTextureStd * nd(rng);
  for (Index t = 0; t < len; ++t) {
    prev = kTexturePhi * prev + innov * nd(rng);
    z(t) = prev;
  }
  return z;
}

}  // namespace

SeriesMatrix make_coupled_dataset(Index T, Index N, const std::vector<Coupling>& couplings,
                                  double noise_sigma, std::uint64_t seed) {
  if (T < 1 || N < 1) fail(ErrorKind::Config, "synthetic dataset needs T, N >= 1");
  if (!(noise_sigma >= 0.0)) fail(ErrorKind::Config, "noise sigma must be >= 0");
  std::vector<bool> is_target(static_cast<std::size_t>(N), false);
  std::vector<bool> coupled(static_cast<std::size_t>(N), false);
  Index pad = 0;
  for (const auto& c : couplings) {
    std::ostringstream where;
    where << "coupling " << c.source << "->" << c.target << " (lag " << c.lag << ")";
    if (c.source < 0 || c.source >= N || c.target < 0 || c.target >= N || c.source == c.target)
      fail(ErrorKind::Config, where.str() + ": variable index out of range");
    if (c.lag < 0 || 4 * c.lag >= T) fail(ErrorKind::Config, where.str() + ": lag must be in [0, T/4)");
    is_target[static_cast<std::size_t>(c.target)] = true;
    coupled[static_cast<std::size_t>(c.target)] = true;
    coupled[static_cast<std::size_t>(c.source)] = true;
    pad = std::max(pad, c.lag);
  }
  for (const auto& c : couplings)
    if (is_target[static_cast<std::size_t>(c.source)])
      fail(ErrorKind::Config, "coupling sources must not themselves be coupled targets");

  std::mt19937_64 rng(seed);

  // Coupled variables get separate frequency-scale strata so their tones
  // never sit on top of each other.
  std::vector<Index> strata;
  for (Index v = 0; v < N; ++v)
    if (coupled[static_cast<std::size_t>(v)]) strata.push_back(v);
  std::shuffle(strata.begin(), strata.end(), rng);
  const double width = strata.empty() ? 0.0 : (kScaleHi - kScaleLo) / static_cast<double>(strata.size());
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::uniform_real_distribution<double> free_scale(kScaleLo, kScaleHi);

  std::uniform_int_distribution<int> n_tones(2, 3);
  const Index len = T + pad;
  Matrix signal(len, N);  // row r holds time r - pad
  for (Index v = 0; v < N; ++v) {
    const auto vi = static_cast<std::size_t>(v);
    const auto slot = std::find(strata.begin(), strata.end(), v);
    const double scale =
        slot != strata.end()
            ? kScaleLo + width * (static_cast<double>(slot - strata.begin()) + 0.5 + jitter(rng))
            : free_scale(rng);
    const auto tones = draw_tones(rng, is_target[vi] ? 1 : n_tones(rng), scale);
    signal.col(v) = texture(rng, len);
    for (Index r = 0; r < len; ++r)
      for (const auto& tone : tones) signal(r, v) += tone.at(static_cast<double>(r - pad));
  }

  SeriesMatrix m;
  m.values = signal.bottomRows(T);
  for (const auto& c : couplings)
    m.values.col(c.target) += c.gain * signal.col(c.source).segment(pad - c.lag, T);

  if (noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_sigma);
    for (Index v = 0; v < N; ++v)
      for (Index t = 0; t < T; ++t) m.values(t, v) += noise(rng);
  }

  for (Index v = 0; v < N; ++v) m.variable_names.push_back("v" + std::to_string(v));
  if (N > 1 && is_target[static_cast<std::size_t>(N - 1)]) m.variable_names.back() = "OT";
  m.norm_stats.assign(static_cast<std::size_t>(N), NormStats{});
  return m;
}

std::vector<Coupling> default_couplings() {
  return {{0, 6, 5, 0.8}, {1, 6, 7, 0.8}, {2, 6, 13, 0.8}};
}

SeriesMatrix default_synthetic(std::uint64_t seed, Index T, double noise_sigma) {
  return make_coupled_dataset(T, 7, default_couplings(), noise_sigma, seed);
}

}  // namespace badtime
