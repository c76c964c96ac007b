#ifndef MOTIFMIX_DIAGNOSTICS_HPP
#define MOTIFMIX_DIAGNOSTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "motifmix/gibbs.hpp"
#include "motifmix/types.hpp"

namespace motifmix {

// Potential scale reduction over >= 2 equal-length scalar series:
// R-hat = sqrt(((n-1)/n W + B/n) / W). Degenerate W = 0 gives 1 when the
// chains also agree (B = 0) and +inf otherwise.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

// Same statistic from per-chain first/second moments (n records each).
double gelman_rubin_from_moments(const std::vector<double>& means,
                                 const std::vector<double>& variances, long n);

// Geweke-style z-score comparing the first `first` fraction of a series
// against the last `last` fraction, with batch-means standard errors.
double geweke_z(const std::vector<double>& series, double first = 0.1,
                double last = 0.5, int batches = 20);

struct Table1CellConfig {
  int J = 1;
  int w = 6;
  int M = 4;
  int n_blocks = 2000;
  int n_datasets = 20;
  std::vector<double> motif_freqs;  // p_j; default 0.005 each
  double a0 = 0.0;                  // background Dirichlet concentration
  double a1 = 0.0;                  // motif-column Dirichlet concentration
  double p0 = -1.0;                 // inference p0; < 0 means sum of p_j
  double beta = 1.0;                // flat hyperparameter value
  long burn_in = 1000;              // systematic sweeps
  long samples = 10000;
  int thin = 1;
  double flag_threshold = 1.5;
  std::uint64_t seed = 0;
  int workers = 0;
  bool geweke = false;
};

struct DatasetDiagnostics {
  double max_r_hat = 0.0;
  bool flagged = false;
  std::vector<double> r_hat;     // per summary
  std::vector<double> geweke_z;  // per chain, |A| series (optional)
};

struct ExperimentReport {
  Table1CellConfig config;
  std::vector<std::string> summary_names;
  std::vector<DatasetDiagnostics> datasets;
  double flagged_percent = 0.0;

  std::string to_json(const std::string& config_hash = "",
                      std::uint64_t master_seed = 0) const;
  // Table-style row: J,w,n_blocks,n_datasets,flagged_percent
  std::string csv_row() const;
};

// One cell of the convergence study: n_datasets simulated datasets, five
// systematic-scan chains each (chain 1 initialized at the true motif-1
// indicators, chain 2 at motif-2 when J >= 2, the rest i.i.d.
// Bernoulli(p0)), R-hat over every summary, flag when max > threshold.
ExperimentReport run_table1_cell(const Table1CellConfig& config);

}  // namespace motifmix

#endif  // MOTIFMIX_DIAGNOSTICS_HPP
