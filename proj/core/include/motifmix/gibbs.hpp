#ifndef MOTIFMIX_GIBBS_HPP
#define MOTIFMIX_GIBBS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "motifmix/model.hpp"
#include "motifmix/rng.hpp"
#include "motifmix/types.hpp"

namespace motifmix {

enum class ScanType { kRandom, kSystematic };

const char* scan_name(ScanType scan);

struct Schedule {
  long burn_in = 1000;   // sweeps for systematic scan, single-site steps for random scan
  long samples = 10000;  // units in the recorded period
  int thin = 1;          // record every `thin` units
  ScanType scan = ScanType::kSystematic;
  bool record_assignments = false;
};

// Recorded summaries per iteration: |A|, theta_hat_{0,m}, theta_hat_{k,m}.
struct ChainTrace {
  int w = 0;
  int M = 0;
  Schedule schedule;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::vector<std::string> columns;
  long n_records = 0;
  std::vector<double> data;  // row-major n_records x columns.size()
  std::vector<Assignment> snapshots;

  double at(long record, int col) const {
    return data[static_cast<std::size_t>(record) * columns.size() + col];
  }
  std::vector<double> column(int col) const;
  int column_index(const std::string& name) const;

  void write_csv(std::ostream& os) const;
  std::string header_json() const;  // metadata sidecar for the CSV
};

// Single-site Gibbs state with incrementally maintained count vectors, so a
// site update costs O(w) rather than O(L).
class GibbsSampler {
 public:
  GibbsSampler(const Sequence& seq, const ModelParams& params, Assignment init);

  const Assignment& assignment() const { return A_; }
  void set_assignment(const Assignment& A);
  long ones() const { return ones_; }
  const Sequence& sequence() const { return *seq_; }

  // pi(A_i=1 | A_[-i], S); linear-space fast path with a log-space fallback
  // when both mixture terms underflow.
  double site_prob_one(int i) const;
  // Exact conditional log odds for site i (same quantity as
  // model::conditional_log_odds, computed from the incremental counts).
  double site_log_odds(int i) const;

  // One step of the lazy random-scan transition matrix T.
  void random_scan_step(CounterRng& rng);
  // One systematic sweep: sites 0..n-1 in order, no holding.
  void systematic_sweep(CounterRng& rng);

  CountVectors counts() const;
  // Writes |A|, theta_hat_0_*, theta_hat_1_*, ..., theta_hat_w_* into out.
  void write_summaries(double* out) const;
  static int summary_count(int w, int M) { return 1 + (w + 1) * M; }

 private:
  void toggle(int i);

  const Sequence* seq_;
  ModelParams params_;
  Assignment A_;
  std::vector<long> motif_counts_;  // w x M flattened
  std::vector<long> bg_counts_;     // M
  std::vector<long> total_counts_;  // M
  long ones_ = 0;
  std::vector<double> beta_sums_;   // (w+1)
  double prior_ratio_ = 0.0;        // p0 / (1-p0)
};

// Spec-level single-transition wrappers.
Assignment random_scan_step(const Sequence& seq, const Assignment& A,
                            const ModelParams& params, CounterRng& rng);
Assignment systematic_sweep(const Sequence& seq, const Assignment& A,
                            const ModelParams& params, CounterRng& rng);

ChainTrace run_chain(const Sequence& seq, const ModelParams& params,
                     const Assignment& init, const Schedule& schedule,
                     std::uint64_t seed, std::uint64_t stream = 0);

std::vector<std::string> summary_columns(int w, int M);

}  // namespace motifmix

#endif  // MOTIFMIX_GIBBS_HPP
