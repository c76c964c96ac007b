#ifndef MOTIFMIX_RNG_HPP
#define MOTIFMIX_RNG_HPP

#include <cstdint>
#include <vector>

namespace motifmix {

// Counter-based generator in the SplittableRandom style: output n is a mix
// of key + n*gamma, so a (seed, stream) pair names a reproducible stream and
// parallel workers obtain independent streams by stream id without sharing
// state. Not cryptographic.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  // Independent child stream; (seed, s1) and (seed, s2) never collide for
  // s1 != s2 in any realistic use.
  CounterRng substream(std::uint64_t id) const {
    CounterRng r(0, 0);
    r.key_ = mix(key_ ^ mix(id + 0x6a09e667f3bcc909ULL));
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  // Uniform on [0,1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0,1); safe as a log() argument.
  double next_unit_pos() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n).
  std::uint64_t next_below(std::uint64_t n);

  bool next_bernoulli(double p) { return next_unit() < p; }

  double next_normal();
  double next_gamma(double shape);
  // log of a Gamma(shape) draw; safe for shapes small enough that the draw
  // itself would underflow.
  double next_log_gamma(double shape);
  void next_dirichlet(const double* alpha, int m, double* out);
  void next_dirichlet_sym(double a, int m, double* out);
  std::vector<double> next_dirichlet_sym(double a, int m) {
    std::vector<double> out(m);
    next_dirichlet_sym(a, m, out.data());
    return out;
  }

  // Index k with probability probs[k] / sum(probs).
  int next_categorical(const double* probs, int k);

  // UniformRandomBitGenerator interface.
  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }
  result_type operator()() { return next_u64(); }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed + kGamma) ^ mix(stream * 0xd1342543de82ef95ULL + 1));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace motifmix

#endif  // MOTIFMIX_RNG_HPP
