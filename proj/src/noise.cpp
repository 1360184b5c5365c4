#include "svint/noise.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>

namespace svint {

uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

uint64_t mix_key(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
  uint64_t h = splitmix64(seed ^ 0x243F6A8885A308D3ull);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return h;
}

double uniform01(uint64_t key) {
  return double(splitmix64(key) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double std_normal(uint64_t key) {
  const double u1 = uniform01(key ^ 0xD1B54A32D192ED03ull);
  const double u2 = uniform01(key ^ 0x8CB92BA72F3D8DD7ull);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

BrownianPath BrownianPath::sample(uint64_t seed, double t0, double t1,
                                  int levels, int channels) {
  if (levels < 0 || channels < 1 || !(t1 > t0))
    throw ConfigError("BrownianPath::sample: need t1 > t0, levels >= 0, channels >= 1");
  BrownianPath p;
  p.seed = seed;
  p.t0 = t0;
  p.t1 = t1;
  p.levels = 0;
  p.channels = channels;
  p.incs.assign(channels, std::vector<double>(1));
  p.endpoint.assign(channels, 0.0);
  const double sq = std::sqrt(t1 - t0);
  for (int ch = 0; ch < channels; ++ch) {
    p.incs[ch][0] = sq * std_normal(mix_key(seed, 0, 0, uint64_t(ch)));
    p.endpoint[ch] = p.incs[ch][0];
  }
  while (p.levels < levels) p = p.refined();
  return p;
}

BrownianPath BrownianPath::refined() const {
  BrownianPath f = *this;
  f.levels = levels + 1;
  const std::int64_t n = steps();
  const double hp = step_size();       // parent interval length
  const double sq = 0.5 * std::sqrt(hp);
  for (int ch = 0; ch < channels; ++ch) {
    std::vector<double> fine(2 * n);
    for (std::int64_t j = 0; j < n; ++j) {
      // W(mid) - W(left) ~ N(parent/2, hp/4), keyed by the parent interval.
      const double z = std_normal(mix_key(seed, uint64_t(f.levels), uint64_t(j), uint64_t(ch)));
      const double half = 0.5 * incs[ch][j];
      const double d = sq * z;
      fine[2 * j] = half + d;
      fine[2 * j + 1] = half - d;
    }
    f.incs[ch] = std::move(fine);
  }
  return f;
}

BrownianPath BrownianPath::restricted(int coarser_levels) const {
  if (coarser_levels < 0 || coarser_levels > levels)
    throw IndexOutOfRange("BrownianPath::restricted: level out of range");
  BrownianPath c = *this;
  c.levels = coarser_levels;
  const std::int64_t n = std::int64_t(1) << coarser_levels;
  const std::int64_t f = steps() / n;
  for (int ch = 0; ch < channels; ++ch) {
    std::vector<double> coarse(n, 0.0);
    for (std::int64_t j = 0; j < n; ++j)
      for (std::int64_t i = 0; i < f; ++i) coarse[j] += incs[ch][j * f + i];
    c.incs[ch] = std::move(coarse);
  }
  return c;
}

double BrownianPath::increment(std::int64_t k, int channel) const {
  if (channel < 0 || channel >= channels || k < 0 || k >= steps())
    throw IndexOutOfRange("BrownianPath::increment: index out of range");
  return incs[channel][size_t(k)];
}

void BrownianPath::write_csv(std::ostream& os) const {
  os << "t,channel,increment\n";
  os << std::setprecision(17);
  const double h = step_size();
  for (int ch = 0; ch < channels; ++ch)
    for (std::int64_t k = 0; k < steps(); ++k)
      os << t0 + double(k) * h << ',' << ch << ',' << incs[ch][size_t(k)] << '\n';
}

} // namespace svint
