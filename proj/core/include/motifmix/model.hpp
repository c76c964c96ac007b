#ifndef MOTIFMIX_MODEL_HPP
#define MOTIFMIX_MODEL_HPP

#include <vector>

#include "motifmix/types.hpp"

namespace motifmix {

// Count families N(A^(k)), N(A^c), N(S). Pure.
CountVectors count_vectors(const Sequence& seq, const Assignment& A);

// log[ theta_0^N(A^c) * prod_k theta_k^N(A^(k)) ]; -inf when a positive
// count meets a zero frequency.
double log_likelihood_given_theta(const Sequence& seq, const Assignment& A,
                                  const ThetaMatrix& theta);

// Log of the integrated posterior mass of A up to one additive constant
// shared by all A for fixed (seq, params). Entirely in log-gamma space.
double log_posterior_unnorm(const Sequence& seq, const Assignment& A,
                            const ModelParams& params);

// Same quantity evaluated from a precomputed count family (used by the
// collapsed-chain code, where counts come from C(A) instead of A).
double log_posterior_unnorm_from_counts(const CountVectors& counts, long abs_A,
                                        long n_blocks, const ModelParams& params);

// Mixture density of one block: f(s|theta) = p0 prod theta_k + (1-p0) prod theta_0.
double marginal_block_density(const std::vector<Symbol>& word,
                              const ThetaMatrix& theta, double p0);

// log pi(A_i=1 | A_[-i], S) - log pi(A_i=0 | A_[-i], S), via the closed-form
// product of gamma ratios and the current frequency estimates. 0-based i.
double conditional_log_odds(const Sequence& seq, const Assignment& A, int i,
                            const ModelParams& params);

inline double conditional_odds(const Sequence& seq, const Assignment& A, int i,
                               const ModelParams& params) {
  return std::exp(conditional_log_odds(seq, A, i, params));
}

// Posterior means of theta given A: row k >= 1 is
// (N(A^(k)) + beta_k) / (|N(A^(k))| + |beta_k|), row 0 the background analog.
ThetaMatrix posterior_mean_estimates(const Sequence& seq, const Assignment& A,
                                     const ModelParams& params);
ThetaMatrix posterior_mean_estimates_from_counts(const CountVectors& counts,
                                                 const ModelParams& params);

// Data-independent lower bounds on the conditional update probabilities:
// pi(A_i=1|.) >= (p0/2) prod_k beta_{k,s_k} / (L + |beta_k|), and the
// analogous background-side bound for pi(A_i=0|.).
double site_prob_one_lower_bound(const Sequence& seq, int i,
                                 const ModelParams& params);
double site_prob_zero_lower_bound(const Sequence& seq, int i,
                                  const ModelParams& params);

}  // namespace motifmix

#endif  // MOTIFMIX_MODEL_HPP
