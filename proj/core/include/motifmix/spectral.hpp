#ifndef MOTIFMIX_SPECTRAL_HPP
#define MOTIFMIX_SPECTRAL_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "motifmix/types.hpp"

namespace motifmix {

// Finite reversible transition operator together with its stationary
// distribution. Dense storage up to `dense_limit` states, CSR above.
struct ReversibleChain {
  int n = 0;
  std::vector<double> log_pi;  // normalized: logsumexp == 0
  Eigen::MatrixXd dense;
  Eigen::SparseMatrix<double, Eigen::RowMajor> sparse;
  bool is_dense = true;
  bool lazy = false;
  bool reversible_verified = false;

  double entry(int i, int j) const;
  double pi(int i) const;
  double min_log_pi() const;
  std::vector<std::pair<int, int>> directed_edges() const;  // i != j, T(i,j) > 0

  // Row-stochasticity, laziness and detailed balance; sets the flags and
  // throws NumericError on violation.
  void verify(double tol_stochastic = 1e-12, double tol_reversible = 1e-10);
};

ReversibleChain make_chain_dense(Eigen::MatrixXd T, std::vector<double> log_pi,
                                 bool verify = true);
ReversibleChain make_chain_sparse(Eigen::SparseMatrix<double, Eigen::RowMajor> T,
                                  std::vector<double> log_pi, bool verify = true);

// Full Gibbs chain on X = {0,1}^(L/w); the state with bitmask b has A_i =
// bit i of b. Dense when 2^(L/w) <= dense_limit.
ReversibleChain build_full_chain(const Sequence& seq, const ModelParams& params,
                                 int max_blocks = 14, int dense_limit = 4096);

struct GapOptions {
  enum class Method { kAuto, kDense, kIterative };
  Method method = Method::kAuto;
  int dense_limit = 1024;     // auto: full eigendecomposition up to this n
  double tol = 1e-10;         // iterative residual tolerance
  int max_iterations = 600;
  int restarts = 2;
  std::uint64_t seed = 0x5eed;
};

// Gap(T) = 1 - lambda_2, computed on the symmetrized operator
// sqrt(T o T^t) (elementwise, equal to D^1/2 T D^-1/2 under reversibility).
double spectral_gap(const ReversibleChain& chain, const GapOptions& opts = {});

// lambda_2 and its eigenvector in the symmetrized coordinates (used for
// conductance sweep cuts).
struct SecondEigenpair {
  double lambda2 = 0.0;
  Eigen::VectorXd vector;
};
SecondEigenpair second_eigenpair(const ReversibleChain& chain,
                                 const GapOptions& opts = {});

struct MixingTimeBounds {
  double lower = 0.0;
  double upper = 0.0;
};
// tau_eps <= Gap^-1 (-ln min_x pi(x) - ln eps),
// tau_eps >= (1/2)(1-Gap)Gap^-1 (-ln 2eps).
MixingTimeBounds mixing_time_bounds(double gap, double min_log_pi, double epsilon);

struct TvMixingResult {
  long tau = 0;
  double tv_at_tau = 0.0;
  bool converged = false;
};
// Smallest n with max-over-starts TV(T^m(x,.), pi) <= eps for all m >= n.
// Uses the spectral representation of T^m; monotonicity of the TV envelope
// (lazy reversible chains) is checked on every evaluated power.
TvMixingResult exact_tv_mixing_time(const ReversibleChain& chain, double epsilon,
                                    long iteration_cap = 1L << 40);

struct ConductanceResult {
  double phi = 0.0;
  std::vector<int> cut;  // achieving set B
  bool exact = false;    // exhaustive subsets vs eigenvector sweep
};
// Exact mode enumerates all proper subsets (n <= max_exact_states) and
// asserts Gap <= 2 Phi; otherwise evaluates sweep cuts of the second
// eigenvector, which upper-bounds Phi.
ConductanceResult conductance(const ReversibleChain& chain,
                              int max_exact_states = 24);
ConductanceResult conductance_exact(const ReversibleChain& chain);
ConductanceResult conductance_sweep(const ReversibleChain& chain);
double conductance_of_set(const ReversibleChain& chain, const std::vector<int>& B);

enum class PathChoice { kBottleneck, kBfs };
struct PathBoundResult {
  double rho = 0.0;
  std::pair<int, int> worst_edge{-1, -1};
};
// Canonical-path constant rho over one simple path per ordered pair;
// Gap >= 1/rho. Default paths come from the maximum-bottleneck spanning
// tree on vertex weights pi; the alternative uses BFS shortest paths.
PathBoundResult path_bound_rho(const ReversibleChain& chain,
                               PathChoice choice = PathChoice::kBottleneck);

// Restriction to a subset: moves leaving the subset are rejected in place.
ReversibleChain restrict_chain(const ReversibleChain& chain,
                               const std::vector<int>& subset);

struct LazyPowerReport {
  int N = 0;
  double gap_p = 0.0;
  double gap_pn = 0.0;
  double slack = 0.0;  // gap_p - gap_pn / N
  bool holds = false;
};
// Checks Gap(P) >= Gap(P^N)/N numerically (dense chains).
LazyPowerReport lazy_power_gap_check(const ReversibleChain& chain, int N,
                                     double tol = 1e-10);

// Dense matrix power of the transition operator (same stationary law).
ReversibleChain chain_power(const ReversibleChain& chain, int N);

// Product chain with component kernels P_k selected with probability b_k.
ReversibleChain product_chain(const std::vector<ReversibleChain>& components,
                              const std::vector<double>& weights);

// Coordinate-triplet text export: lines "i j T(i,j)".
void write_matrix_coo(const ReversibleChain& chain, std::ostream& os);

}  // namespace motifmix

#endif  // MOTIFMIX_SPECTRAL_HPP
