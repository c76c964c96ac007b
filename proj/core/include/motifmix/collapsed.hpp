#ifndef MOTIFMIX_COLLAPSED_HPP
#define MOTIFMIX_COLLAPSED_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "motifmix/spectral.hpp"
#include "motifmix/types.hpp"

namespace motifmix {

// C(S): occurrence count of each distinct block word, ascending word index.
struct WordCountTable {
  std::vector<WordIndex> words;
  std::vector<int> counts;

  int n_words() const { return static_cast<int>(words.size()); }
  int find(WordIndex word) const;  // -1 when absent
  long total() const;              // == L/w
};

WordCountTable sequence_counts(const Sequence& seq);

// C(A): motif-instance counts per distinct word, aligned with the word
// table of the sequence it was collapsed from (zeros kept).
struct CollapsedState {
  std::vector<WordIndex> words;
  std::vector<int> c;
};

CollapsedState collapse(const Sequence& seq, const Assignment& A);

struct CollapsedOptions {
  std::size_t state_budget = 80'000'000;  // enumeration cap for pi_bar
  std::size_t matrix_budget = 262'144;    // sparse T-bar built only below this
};

// The collapsed space X-bar = prod_s {0..C(S)_s}, its marginal posterior
// pi_bar and (when small enough) the closed-form projection matrix T-bar.
// State index is mixed-radix over the active words:
// idx = sum_s c_s * stride_s.
struct CollapsedChain {
  WordCountTable table;
  int n_blocks = 0;
  int w = 0;
  int M = 0;
  std::vector<std::size_t> stride;
  std::size_t n_states = 0;
  std::vector<double> log_pi;  // normalized log pi_bar
  bool has_matrix = false;
  Eigen::SparseMatrix<double, Eigen::RowMajor> transitions;

  std::vector<int> decode(std::size_t idx) const;
  std::size_t encode(const std::vector<int>& c) const;
  std::size_t state_of(const CollapsedState& state) const;

  // View as a generic reversible chain (requires has_matrix).
  ReversibleChain to_reversible_chain() const;
};

// pi_bar only: log pi_bar(c) = log|D_c| + log pi(A_c|S) - log Z.
CollapsedChain collapsed_posterior(const Sequence& seq, const ModelParams& params,
                                   const CollapsedOptions& opts = {});

// pi_bar plus the closed-form T-bar: from state c the chain moves to
// c -/+ e_s with probability (c_s / (2n)) pi(A_i=0|.) resp.
// ((C(S)_s - c_s) / (2n)) pi(A_i=1|.), conditionals evaluated at any
// representative. Verifies stochasticity and detailed balance.
CollapsedChain projection_matrix(const Sequence& seq, const ModelParams& params,
                                 const CollapsedOptions& opts = {});

struct BottleneckResult {
  double log_d = 0.0;
  double d = 0.0;  // exp(log_d); may over- or underflow, log_d is exact
  std::size_t state1 = 0;
  std::size_t state2 = 0;
  std::size_t bottleneck_state = 0;
  double log_bottleneck = 0.0;  // log pi_bar at the bottleneck vertex
  bool restricted = false;      // top-K heuristic instead of all pairs
  int top_k = 0;
};

// d = min over pairs (c1,c2) of
//     [max over simple paths, min over path vertices of pi_bar(c)]
//     / (pi_bar(c1) pi_bar(c2)).
// The inner maximin is solved exactly by activating vertices in decreasing
// pi_bar order and recording component merges (widest path with vertex
// capacities). Full mode minimizes over all pairs; restricted mode only
// over pairs of the top_k most probable states (a labeled heuristic).
BottleneckResult bottleneck_d(const CollapsedChain& chain, bool restricted = false,
                              int top_k = 32);

// pi_bar as CSV: one row per state, columns c_<word> then log_pi_bar.
void write_pi_csv(const CollapsedChain& chain, std::ostream& os);
// T-bar in coordinate-triplet text form.
void write_transitions_coo(const CollapsedChain& chain, std::ostream& os);

}  // namespace motifmix

#endif  // MOTIFMIX_COLLAPSED_HPP
