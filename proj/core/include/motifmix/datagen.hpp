#ifndef MOTIFMIX_DATAGEN_HPP
#define MOTIFMIX_DATAGEN_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "motifmix/rng.hpp"
#include "motifmix/types.hpp"

namespace motifmix {

// Data-generating mixture with J true motifs plus background. This is the
// model the data come from, distinct from the single-motif inference model.
struct GenerativeModel {
  int J = 0;
  int w = 0;
  int M = 0;
  std::vector<double> motif_freqs;                             // p_1..p_J
  std::vector<std::vector<std::vector<double>>> motif_matrices;  // J x w x M
  std::vector<double> background;                              // theta_0*

  double background_mass() const;  // 1 - sum_j p_j
  void validate() const;

  // Pure-background model with the given theta_0*.
  static GenerativeModel background_only(int w, int M,
                                         std::vector<double> theta0);
  // Each motif j is the fixed word words[j] (columns are point masses).
  static GenerativeModel deterministic(int w, int M,
                                       const std::vector<std::vector<Symbol>>& words,
                                       const std::vector<double>& freqs,
                                       std::vector<double> theta0);
};

// Fixed length-w words t^j; valid only if every pair disagrees somewhere.
struct DeterministicMotifSet {
  std::vector<std::vector<Symbol>> words;

  // Minimum over motif pairs of the disagreement fraction (1/w) |{k: t^j_k != t^j'_k}|.
  double min_disagreement(int w) const;
  void validate(int w, int M) const;
};

// g(s) under the model: sum_j p_j prod_k theta^{j*}_{k,s_k} + (1-sum p) prod theta*_{0,s_k}.
double generative_pmf(const GenerativeModel& gen, const std::vector<Symbol>& word);
double generative_pmf(const GenerativeModel& gen, WordIndex word);

// Draws n_blocks i.i.d. blocks; returns the sequence and per-block latent
// labels (0 = background, j = motif j), which the diagnostics harness uses
// to initialize chains at the true indicator vectors.
std::pair<Sequence, std::vector<int>> sample_sequence(const GenerativeModel& gen,
                                                      int n_blocks,
                                                      CounterRng& rng);
std::pair<Sequence, std::vector<int>> sample_sequence(const GenerativeModel& gen,
                                                      int n_blocks,
                                                      std::uint64_t seed,
                                                      std::uint64_t stream = 0);

// Concentration a such that the Monte-Carlo median of max_m theta_m under
// Dirichlet(a,...,a) on M categories matches target within +/-0.005.
// Bisection over [1e-4, 1e4]; the median is decreasing in a.
double calibrate_dirichlet_concentration(double target_median_max, int M,
                                         int mc_samples, std::uint64_t seed);

// Monte-Carlo median of max_m theta_m for Dirichlet(a,...,a).
double simulate_median_max(double a, int M, int mc_samples, CounterRng& rng);

// Study model of the simulation protocol: motif columns i.i.d.
// Dirichlet(a1 * 1), background Dirichlet(a0 * 1).
GenerativeModel sample_study_model(int J, int w, int M,
                                   const std::vector<double>& motif_freqs,
                                   double a0, double a1, CounterRng& rng);

}  // namespace motifmix

#endif  // MOTIFMIX_DATAGEN_HPP
