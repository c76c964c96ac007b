#include "motifmix/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace motifmix {

std::uint64_t CounterRng::next_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("next_below: n must be positive");
  const std::uint64_t limit = ~0ULL - ~0ULL % n;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return r % n;
}

double CounterRng::next_normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller.
  const double u1 = next_unit_pos();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925 * u2;
  cached_normal_ = r * std::sin(a);
  has_cached_normal_ = true;
  return r * std::cos(a);
}

double CounterRng::next_gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("next_gamma: shape must be > 0");
  if (shape < 1.0) {
    // Boost to shape+1, then scale by U^(1/shape).
    const double g = next_gamma(shape + 1.0);
    const double u = next_unit_pos();
    return g * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_unit_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double CounterRng::next_log_gamma(double shape) {
  if (shape >= 0.1) return std::log(next_gamma(shape));
  const double g = next_gamma(shape + 1.0);
  const double u = next_unit_pos();
  return std::log(g) + std::log(u) / shape;
}

namespace {

// Normalize gamma draws given in log form; immune to underflow of the
// draws themselves.
void log_normalize(double* logs, int m, double* out) {
  double mx = logs[0];
  for (int i = 1; i < m; ++i) mx = std::max(mx, logs[i]);
  double total = 0.0;
  for (int i = 0; i < m; ++i) total += std::exp(logs[i] - mx);
  for (int i = 0; i < m; ++i) out[i] = std::exp(logs[i] - mx) / total;
}

}  // namespace

void CounterRng::next_dirichlet(const double* alpha, int m, double* out) {
  bool tiny = false;
  for (int i = 0; i < m; ++i) tiny = tiny || alpha[i] < 0.1;
  if (tiny) {
    std::vector<double> logs(m);
    for (int i = 0; i < m; ++i) logs[i] = next_log_gamma(alpha[i]);
    log_normalize(logs.data(), m, out);
    return;
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    out[i] = next_gamma(alpha[i]);
    total += out[i];
  }
  for (int i = 0; i < m; ++i) out[i] /= total;
}

void CounterRng::next_dirichlet_sym(double a, int m, double* out) {
  if (a < 0.1) {
    std::vector<double> logs(m);
    for (int i = 0; i < m; ++i) logs[i] = next_log_gamma(a);
    log_normalize(logs.data(), m, out);
    return;
  }
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    out[i] = next_gamma(a);
    total += out[i];
  }
  for (int i = 0; i < m; ++i) out[i] /= total;
}

int CounterRng::next_categorical(const double* probs, int k) {
  double total = 0.0;
  for (int i = 0; i < k; ++i) total += probs[i];
  double u = next_unit() * total;
  for (int i = 0; i < k; ++i) {
    u -= probs[i];
    if (u < 0.0) return i;
  }
  return k - 1;
}

}  // namespace motifmix
