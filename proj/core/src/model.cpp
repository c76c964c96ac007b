#include "motifmix/model.hpp"

#include <cmath>
#include <string>

namespace motifmix {

namespace {

void check_dims(const Sequence& seq, const Assignment& A) {
  if (A.size() != seq.n_blocks())
    throw DimensionError("assignment length " + std::to_string(A.size()) +
                         " != block count " + std::to_string(seq.n_blocks()));
}

void check_params(const Sequence& seq, const ModelParams& params) {
  if (params.w() != seq.w() || params.M() != seq.M())
    throw DimensionError("params (w,M) do not match sequence");
}

}  // namespace

CountVectors count_vectors(const Sequence& seq, const Assignment& A) {
  check_dims(seq, A);
  const int w = seq.w();
  const int M = seq.M();
  CountVectors cv;
  cv.motif.assign(w, std::vector<long>(M, 0));
  cv.background.assign(M, 0);
  cv.total.assign(M, 0);
  for (long p = 0; p < seq.L(); ++p) cv.total[seq.symbols()[p] - 1]++;
  for (int i = 0; i < seq.n_blocks(); ++i) {
    if (!A.bits[i]) continue;
    for (int k = 0; k < w; ++k) cv.motif[k][seq.at(i, k) - 1]++;
  }
  for (int m = 0; m < M; ++m) {
    long used = 0;
    for (int k = 0; k < w; ++k) used += cv.motif[k][m];
    cv.background[m] = cv.total[m] - used;
  }
  return cv;
}

double log_likelihood_given_theta(const Sequence& seq, const Assignment& A,
                                  const ThetaMatrix& theta) {
  if (theta.w() != seq.w() || theta.M() != seq.M())
    throw DimensionError("theta (w,M) do not match sequence");
  const CountVectors cv = count_vectors(seq, A);
  double ll = 0.0;
  auto add = [&ll](long n, double p) {
    if (n == 0) return;
    if (p <= 0.0) {
      ll = kNegInf;
      return;
    }
    if (std::isfinite(ll)) ll += n * std::log(p);
  };
  for (int m = 0; m < seq.M(); ++m) add(cv.background[m], theta.rows[0][m]);
  for (int k = 0; k < seq.w(); ++k)
    for (int m = 0; m < seq.M(); ++m) add(cv.motif[k][m], theta.rows[k + 1][m]);
  return ll;
}

double log_posterior_unnorm_from_counts(const CountVectors& counts, long abs_A,
                                        long n_blocks, const ModelParams& params) {
  const int w = static_cast<int>(counts.motif.size());
  const int M = static_cast<int>(counts.background.size());
  double lp = abs_A * std::log(params.p0) +
              (n_blocks - abs_A) * std::log1p(-params.p0);
  double bg_total = 0.0;
  for (int m = 0; m < M; ++m) {
    lp += std::lgamma(counts.background[m] + params.beta[0][m]);
    bg_total += counts.background[m] + params.beta[0][m];
  }
  lp -= std::lgamma(bg_total);
  for (int k = 0; k < w; ++k) {
    double row_total = 0.0;
    for (int m = 0; m < M; ++m) {
      lp += std::lgamma(counts.motif[k][m] + params.beta[k + 1][m]);
      row_total += counts.motif[k][m] + params.beta[k + 1][m];
    }
    lp -= std::lgamma(row_total);
  }
  return lp;
}

double log_posterior_unnorm(const Sequence& seq, const Assignment& A,
                            const ModelParams& params) {
  check_params(seq, params);
  const CountVectors cv = count_vectors(seq, A);
  return log_posterior_unnorm_from_counts(cv, A.count(), seq.n_blocks(), params);
}

double marginal_block_density(const std::vector<Symbol>& word,
                              const ThetaMatrix& theta, double p0) {
  const int w = theta.w();
  if (static_cast<int>(word.size()) != w)
    throw DimensionError("word length != w");
  double motif = 1.0, background = 1.0;
  for (int k = 0; k < w; ++k) {
    const int m = word[k] - 1;
    if (m < 0 || m >= theta.M()) throw DimensionError("word symbol out of range");
    motif *= theta.rows[k + 1][m];
    background *= theta.rows[0][m];
  }
  return p0 * motif + (1.0 - p0) * background;
}

double conditional_log_odds(const Sequence& seq, const Assignment& A, int i,
                            const ModelParams& params) {
  check_dims(seq, A);
  check_params(seq, params);
  if (i < 0 || i >= seq.n_blocks())
    throw DimensionError("block index out of range");
  const int w = seq.w();
  const int M = seq.M();

  // Counts with A_i forced to 0; the background then contains block i.
  Assignment A0 = A;
  A0.bits[i] = 0;
  const CountVectors cv = count_vectors(seq, A0);
  const long rest_ones = A0.count();

  double lo = std::log(params.p0) - std::log1p(-params.p0);

  // Gamma-ratio factor for the background counts: numerator at A_i=1
  // (block i removed from the background), denominator at A_i=0.
  std::vector<long> delta(M, 0);
  for (int k = 0; k < w; ++k) delta[seq.at(i, k) - 1]++;
  double n0_total = 0.0, n1_total = 0.0;
  for (int m = 0; m < M; ++m) {
    const double b0m = params.beta[0][m];
    lo += std::lgamma(cv.background[m] - delta[m] + b0m) -
          std::lgamma(cv.background[m] + b0m);
    n0_total += cv.background[m] + b0m;
    n1_total += cv.background[m] - delta[m] + b0m;
  }
  lo += std::lgamma(n0_total) - std::lgamma(n1_total);

  // Current frequency estimates theta-check_k evaluated without block i.
  for (int k = 0; k < w; ++k) {
    const int m = seq.at(i, k) - 1;
    lo += std::log(cv.motif[k][m] + params.beta[k + 1][m]) -
          std::log(rest_ones + params.beta_row_sum(k + 1));
  }
  return lo;
}

ThetaMatrix posterior_mean_estimates_from_counts(const CountVectors& counts,
                                                 const ModelParams& params) {
  const int w = static_cast<int>(counts.motif.size());
  const int M = static_cast<int>(counts.background.size());
  ThetaMatrix t;
  t.rows.assign(w + 1, std::vector<double>(M, 0.0));
  double bg_abs = 0.0;
  for (int m = 0; m < M; ++m) bg_abs += counts.background[m];
  const double bg_den = bg_abs + params.beta_row_sum(0);
  for (int m = 0; m < M; ++m)
    t.rows[0][m] = (counts.background[m] + params.beta[0][m]) / bg_den;
  for (int k = 0; k < w; ++k) {
    double abs_k = 0.0;
    for (int m = 0; m < M; ++m) abs_k += counts.motif[k][m];
    const double den = abs_k + params.beta_row_sum(k + 1);
    for (int m = 0; m < M; ++m)
      t.rows[k + 1][m] = (counts.motif[k][m] + params.beta[k + 1][m]) / den;
  }
  return t;
}

ThetaMatrix posterior_mean_estimates(const Sequence& seq, const Assignment& A,
                                     const ModelParams& params) {
  check_dims(seq, A);
  check_params(seq, params);
  return posterior_mean_estimates_from_counts(count_vectors(seq, A), params);
}

double site_prob_one_lower_bound(const Sequence& seq, int i,
                                 const ModelParams& params) {
  check_params(seq, params);
  double bound = params.p0 / 2.0;
  for (int k = 0; k < seq.w(); ++k) {
    const int m = seq.at(i, k) - 1;
    bound *= params.beta[k + 1][m] / (seq.L() + params.beta_row_sum(k + 1));
  }
  return bound;
}

double site_prob_zero_lower_bound(const Sequence& seq, int i,
                                  const ModelParams& params) {
  check_params(seq, params);
  // Background analog of the motif-side bound: each rising-factorial term of
  // the gamma ratio is at least beta_{0,s_k} / (L + |beta_0| + w).
  double bound = (1.0 - params.p0) / 2.0;
  const double den = seq.L() + params.beta_row_sum(0) + seq.w();
  for (int k = 0; k < seq.w(); ++k) {
    const int m = seq.at(i, k) - 1;
    bound *= params.beta[0][m] / den;
  }
  return bound;
}

}  // namespace motifmix
