#pragma once

#include <cstdint>

namespace cblab {

// Counter-based pseudo-random stream. Substream i of master seed s starts
// the counter at mix(s ^ mix(i)) and advances it by a fixed odd increment;
// each output is the SplitMix64 finalizer of the counter. Draws are a pure
// function of (seed, stream, draw index): reproducible under any thread
// scheduling, and streams can be created O(1) per path.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform01();  // [0, 1), 53-bit
  double exponential(double mean);
  double normal();  // standard normal, Box-Muller (two uniforms per call)
  double gamma(double shape, double scale);  // shape >= 0 (0 -> exactly 0)
  long long poisson(double mean);
  long long binomial(long long n, double p);
  // Failures before `successes`-th success, success probability p;
  // real-valued `successes` allowed (Gamma-Poisson mixture).
  long long negative_binomial(double successes, double p);

 private:
  std::uint64_t state_;
};

// Seed plus the substream derivation rule (documented above); carried in
// ensembles as provenance.
struct RngSpec {
  std::uint64_t seed = 0;
  RngStream stream(std::uint64_t index) const { return {seed, index}; }
};

}  // namespace cblab
