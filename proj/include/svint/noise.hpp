#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "svint/errors.hpp"

namespace svint {

// Stateless counter-based randomness. Every draw is keyed, so refining a path
// or re-running an ensemble member never perturbs draws made elsewhere.
uint64_t splitmix64(uint64_t x);
uint64_t mix_key(uint64_t seed, uint64_t a, uint64_t b, uint64_t c);
double uniform01(uint64_t key);   // in (0,1)
double std_normal(uint64_t key);  // N(0,1) via Box-Muller

// Sequential stream of standard normals, for ensemble initialization.
class NormalStream {
 public:
  explicit NormalStream(uint64_t seed, uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}
  double next() { return std_normal(mix_key(seed_, 0x5eedu, stream_, counter_++)); }

 private:
  uint64_t seed_, stream_, counter_ = 0;
};

// Brownian increments on a dyadic grid over [t0, t1]. Increment k at level L
// covers [t0 + k*h, t0 + (k+1)*h] with h = (t1-t0)/2^L. Midpoint draws are
// keyed by (seed, level, parent index, channel): refinement is a pure
// Brownian-bridge fill-in and coarse increments are left untouched.
struct BrownianPath {
  uint64_t seed = 0;
  double t0 = 0.0, t1 = 1.0;
  int levels = 0;
  int channels = 1;
  std::vector<std::vector<double>> incs;  // [channel][k], 2^levels entries
  std::vector<double> endpoint;           // W(t1)-W(t0) per channel (level-0 draw)

  static BrownianPath sample(uint64_t seed, double t0, double t1, int levels,
                             int channels = 1);

  BrownianPath refined() const;                 // one level finer, consistent
  BrownianPath restricted(int coarser_levels) const;  // pairwise sums down

  double increment(std::int64_t k, int channel) const;
  std::int64_t steps() const { return std::int64_t(1) << levels; }
  double step_size() const { return (t1 - t0) / double(steps()); }

  // Header line then one row per increment: t, channel, increment.
  void write_csv(std::ostream& os) const;
};

} // namespace svint
