#include "motifmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

#include "motifmix/gibbs.hpp"
#include "motifmix/model.hpp"
#include "motifmix/rng.hpp"
#include "motifmix/util.hpp"

namespace motifmix {

namespace {

Eigen::VectorXd pi_vector(const ReversibleChain& chain) {
  Eigen::VectorXd pi(chain.n);
  for (int i = 0; i < chain.n; ++i) pi[i] = std::exp(chain.log_pi[i]);
  return pi;
}

// Symmetrized operator sqrt(T_ij * T_ji); under detailed balance this equals
// D^1/2 T D^-1/2 and shares the spectrum of T.
Eigen::MatrixXd symmetrize_dense(const ReversibleChain& chain) {
  Eigen::MatrixXd T = chain.is_dense ? chain.dense : Eigen::MatrixXd(chain.sparse);
  Eigen::MatrixXd S(chain.n, chain.n);
  for (int i = 0; i < chain.n; ++i)
    for (int j = 0; j < chain.n; ++j)
      S(i, j) = std::sqrt(T(i, j) * T(j, i));
  return S;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> symmetrize_sparse(
    const ReversibleChain& chain) {
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  if (chain.is_dense) {
    for (int i = 0; i < chain.n; ++i)
      for (int j = 0; j < chain.n; ++j) {
        const double v = std::sqrt(chain.dense(i, j) * chain.dense(j, i));
        if (v > 0.0) trips.emplace_back(i, j, v);
      }
  } else {
    Eigen::SparseMatrix<double, Eigen::RowMajor> Tt = chain.sparse.transpose();
    for (int i = 0; i < chain.sparse.outerSize(); ++i)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
               chain.sparse, i);
           it; ++it) {
        const double back = Tt.coeff(it.row(), it.col());
        const double v = std::sqrt(it.value() * back);
        if (v > 0.0) trips.emplace_back(it.row(), it.col(), v);
      }
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> S(chain.n, chain.n);
  S.setFromTriplets(trips.begin(), trips.end());
  return S;
}

// Largest eigenvalue of S with the direction `deflate` projected out.
// Lanczos with full reorthogonalization; returns the Ritz pair.
struct RitzPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  bool converged = false;
};

template <typename MatVec>
RitzPair lanczos_top(const MatVec& apply, int n, const Eigen::VectorXd& deflate,
                     double tol, int max_iter, CounterRng& rng) {
  RitzPair out;
  const int m_max = std::min(max_iter, n);
  std::vector<Eigen::VectorXd> basis;
  basis.reserve(m_max);
  std::vector<double> alpha, beta;

  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.next_normal();
  v -= deflate * deflate.dot(v);
  if (v.norm() < 1e-300) return out;
  v.normalize();

  Eigen::VectorXd w(n), prev = Eigen::VectorXd::Zero(n);
  bool exhausted = false;
  for (int j = 0; j < m_max; ++j) {
    basis.push_back(v);
    apply(v, w);
    const double a = v.dot(w);
    alpha.push_back(a);
    w -= a * v;
    if (j > 0) w -= beta.back() * prev;
    // full reorthogonalization against the deflated direction and the basis
    w -= deflate * deflate.dot(w);
    for (const auto& q : basis) w -= q * q.dot(w);
    const double b = w.norm();

    const bool check_now = b < 1e-13 || j == m_max - 1 || (j + 1) % 10 == 0;
    if (check_now) {
      const int k = j + 1;
      Eigen::MatrixXd Tk = Eigen::MatrixXd::Zero(k, k);
      for (int t = 0; t < k; ++t) {
        Tk(t, t) = alpha[t];
        if (t + 1 < k) Tk(t, t + 1) = Tk(t + 1, t) = beta[t];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tk);
      const int top = k - 1;
      const double theta = es.eigenvalues()(top);
      const Eigen::VectorXd s = es.eigenvectors().col(top);
      const double resid = b * std::abs(s[k - 1]);
      if (resid <= tol * std::max(1.0, std::abs(theta)) || b < 1e-13 ||
          j == m_max - 1) {
        out.value = theta;
        out.vector = Eigen::VectorXd::Zero(n);
        for (int t = 0; t < k; ++t) out.vector += s[t] * basis[t];
        out.vector.normalize();
        out.converged = resid <= tol * std::max(1.0, std::abs(theta)) || b < 1e-13;
        return out;
      }
    }
    if (b < 1e-13) {
      exhausted = true;
      break;
    }
    beta.push_back(b);
    prev = v;
    v = w / b;
  }
  (void)exhausted;
  return out;
}

SecondEigenpair second_eigenpair_iterative(const ReversibleChain& chain,
                                           const GapOptions& opts) {
  Eigen::VectorXd deflate(chain.n);
  for (int i = 0; i < chain.n; ++i) deflate[i] = std::exp(0.5 * chain.log_pi[i]);
  deflate.normalize();

  SecondEigenpair best;
  best.lambda2 = -2.0;
  if (chain.is_dense) {
    Eigen::MatrixXd S = symmetrize_dense(chain);
    auto apply = [&S](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = S * x; };
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
      CounterRng rng(opts.seed, 17 + r);
      RitzPair p = lanczos_top(apply, chain.n, deflate, opts.tol,
                               opts.max_iterations, rng);
      if (!p.converged)
        throw NumericError("iterative eigensolver failed to converge");
      if (p.value > best.lambda2) {
        best.lambda2 = p.value;
        best.vector = p.vector;
      }
    }
  } else {
    Eigen::SparseMatrix<double, Eigen::RowMajor> S = symmetrize_sparse(chain);
    auto apply = [&S](const Eigen::VectorXd& x, Eigen::VectorXd& y) { y = S * x; };
    for (int r = 0; r < std::max(1, opts.restarts); ++r) {
      CounterRng rng(opts.seed, 17 + r);
      RitzPair p = lanczos_top(apply, chain.n, deflate, opts.tol,
                               opts.max_iterations, rng);
      if (!p.converged)
        throw NumericError("iterative eigensolver failed to converge");
      if (p.value > best.lambda2) {
        best.lambda2 = p.value;
        best.vector = p.vector;
      }
    }
  }
  return best;
}

SecondEigenpair second_eigenpair_dense(const ReversibleChain& chain) {
  Eigen::MatrixXd S = symmetrize_dense(chain);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw NumericError("dense eigendecomposition failed");
  SecondEigenpair out;
  if (chain.n == 1) {
    out.lambda2 = 0.0;
    out.vector = Eigen::VectorXd::Zero(1);
    return out;
  }
  out.lambda2 = es.eigenvalues()(chain.n - 2);
  out.vector = es.eigenvectors().col(chain.n - 2);
  return out;
}

}  // namespace

double ReversibleChain::entry(int i, int j) const {
  return is_dense ? dense(i, j) : sparse.coeff(i, j);
}

double ReversibleChain::pi(int i) const { return std::exp(log_pi[i]); }

double ReversibleChain::min_log_pi() const {
  return *std::min_element(log_pi.begin(), log_pi.end());
}

std::vector<std::pair<int, int>> ReversibleChain::directed_edges() const {
  std::vector<std::pair<int, int>> edges;
  if (is_dense) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && dense(i, j) > 0.0) edges.emplace_back(i, j);
  } else {
    for (int i = 0; i < sparse.outerSize(); ++i)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sparse, i);
           it; ++it)
        if (it.row() != it.col() && it.value() > 0.0)
          edges.emplace_back(it.row(), it.col());
  }
  return edges;
}

void ReversibleChain::verify(double tol_stochastic, double tol_reversible) {
  if (n <= 0 || static_cast<int>(log_pi.size()) != n)
    throw DimensionError("ReversibleChain: inconsistent sizes");
  // rows sum to one
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    if (is_dense)
      s = dense.row(i).sum();
    else
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sparse, i);
           it; ++it)
        s += it.value();
    if (std::abs(s - 1.0) > tol_stochastic)
      throw NumericError("row " + std::to_string(i) + " sums to " +
                         std::to_string(s));
  }
  // detailed balance, relative
  double min_diag = 1.0;
  auto check_edge = [&](int i, int j, double tij) {
    if (i == j) return;
    const double tji = entry(j, i);
    const double f1 = std::exp(log_pi[i]) * tij;
    const double f2 = std::exp(log_pi[j]) * tji;
    const double scale = std::max({f1, f2, 1e-300});
    if (std::abs(f1 - f2) > tol_reversible * scale)
      throw NumericError("detailed balance violated at (" + std::to_string(i) +
                         "," + std::to_string(j) + ")");
  };
  if (is_dense) {
    for (int i = 0; i < n; ++i) {
      min_diag = std::min(min_diag, dense(i, i));
      for (int j = i + 1; j < n; ++j)
        if (dense(i, j) > 0.0 || dense(j, i) > 0.0) check_edge(i, j, dense(i, j));
    }
  } else {
    for (int i = 0; i < sparse.outerSize(); ++i) {
      min_diag = std::min(min_diag, sparse.coeff(i, i));
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sparse, i);
           it; ++it)
        check_edge(it.row(), it.col(), it.value());
    }
  }
  lazy = min_diag >= 0.5 - 1e-12;
  reversible_verified = true;
}

ReversibleChain make_chain_dense(Eigen::MatrixXd T, std::vector<double> log_pi,
                                 bool verify) {
  ReversibleChain chain;
  chain.n = static_cast<int>(T.rows());
  chain.dense = std::move(T);
  chain.log_pi = std::move(log_pi);
  chain.is_dense = true;
  if (verify) chain.verify();
  return chain;
}

ReversibleChain make_chain_sparse(Eigen::SparseMatrix<double, Eigen::RowMajor> T,
                                  std::vector<double> log_pi, bool verify) {
  ReversibleChain chain;
  chain.n = static_cast<int>(T.rows());
  chain.sparse = std::move(T);
  chain.is_dense = false;
  chain.log_pi = std::move(log_pi);
  if (verify) chain.verify();
  return chain;
}

ReversibleChain build_full_chain(const Sequence& seq, const ModelParams& params,
                                 int max_blocks, int dense_limit) {
  const int nb = seq.n_blocks();
  if (nb > max_blocks)
    throw ResourceError("full chain on " + std::to_string(nb) +
                        " blocks needs 2^" + std::to_string(nb) +
                        " states; the exact enumeration limit is " +
                        std::to_string(max_blocks) + " blocks");
  const long N = 1L << nb;

  // Enumerate states in Gray-code order so consecutive states differ by one
  // toggle; log-posterior and conditionals come from the incremental counts.
  GibbsSampler sampler(seq, params, Assignment(nb, false));
  std::vector<double> log_pi(N);
  const bool dense = N <= dense_limit;
  Eigen::MatrixXd T;
  std::vector<Eigen::Triplet<double>> trips;
  if (dense)
    T = Eigen::MatrixXd::Zero(N, N);
  else
    trips.reserve(static_cast<std::size_t>(N) * (nb + 1));

  const double half_site = 0.5 / nb;
  long state = 0;
  for (long g = 0;; ++g) {
    log_pi[state] = log_posterior_unnorm_from_counts(sampler.counts(),
                                                     sampler.ones(), nb, params);
    double diag = 1.0;
    for (int i = 0; i < nb; ++i) {
      const double p1 = sampler.site_prob_one(i);
      const bool set = (state >> i) & 1;
      const double p_flip = half_site * (set ? 1.0 - p1 : p1);
      const long neighbor = state ^ (1L << i);
      if (dense)
        T(state, neighbor) = p_flip;
      else
        trips.emplace_back(static_cast<int>(state), static_cast<int>(neighbor),
                           p_flip);
      diag -= p_flip;
    }
    if (dense)
      T(state, state) = diag;
    else
      trips.emplace_back(static_cast<int>(state), static_cast<int>(state), diag);

    if (g == N - 1) break;
    const int flip = std::countr_zero(static_cast<unsigned long>(g + 1));
    sampler.set_assignment([&] {
      Assignment A = sampler.assignment();
      A.bits[flip] ^= 1;
      return A;
    }());
    state ^= 1L << flip;
  }

  const double log_z = log_sum_exp(log_pi);
  for (auto& lp : log_pi) lp -= log_z;

  ReversibleChain chain;
  chain.n = static_cast<int>(N);
  chain.log_pi = std::move(log_pi);
  chain.is_dense = dense;
  if (dense) {
    chain.dense = std::move(T);
  } else {
    Eigen::SparseMatrix<double, Eigen::RowMajor> S(N, N);
    S.setFromTriplets(trips.begin(), trips.end());
    chain.sparse = std::move(S);
  }
  chain.verify(1e-12, 1e-10);
  return chain;
}

double spectral_gap(const ReversibleChain& chain, const GapOptions& opts) {
  if (!chain.reversible_verified)
    throw NumericError("spectral_gap: chain is not reversible-verified");
  if (chain.n == 1) return 1.0;
  const bool use_dense =
      opts.method == GapOptions::Method::kDense ||
      (opts.method == GapOptions::Method::kAuto && chain.n <= opts.dense_limit);
  if (use_dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize_dense(chain),
                                                      Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw NumericError("dense eigendecomposition failed");
    return 1.0 - es.eigenvalues()(chain.n - 2);
  }
  return 1.0 - second_eigenpair_iterative(chain, opts).lambda2;
}

SecondEigenpair second_eigenpair(const ReversibleChain& chain,
                                 const GapOptions& opts) {
  if (!chain.reversible_verified)
    throw NumericError("second_eigenpair: chain is not reversible-verified");
  if (chain.n == 1) {
    SecondEigenpair out;
    out.lambda2 = 0.0;
    out.vector = Eigen::VectorXd::Zero(1);
    return out;
  }
  switch (opts.method) {
    case GapOptions::Method::kDense:
      return second_eigenpair_dense(chain);
    case GapOptions::Method::kIterative:
      return second_eigenpair_iterative(chain, opts);
    case GapOptions::Method::kAuto:
    default:
      if (chain.n <= opts.dense_limit) return second_eigenpair_dense(chain);
      return second_eigenpair_iterative(chain, opts);
  }
}

MixingTimeBounds mixing_time_bounds(double gap, double min_log_pi, double epsilon) {
  if (!(gap > 0.0 && gap <= 1.0 + 1e-12))
    throw NumericError("mixing_time_bounds: gap must be in (0,1]");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw NumericError("mixing_time_bounds: epsilon must be in (0,1)");
  MixingTimeBounds b;
  b.upper = (1.0 / gap) * (-min_log_pi - std::log(epsilon));
  b.lower = 0.5 * (1.0 - gap) * (1.0 / gap) * (-std::log(2.0 * epsilon));
  return b;
}

TvMixingResult exact_tv_mixing_time(const ReversibleChain& chain, double epsilon,
                                    long iteration_cap) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw NumericError("exact_tv_mixing_time: epsilon must be in (0,1)");
  if (chain.n > 4096)
    throw ResourceError("exact_tv_mixing_time limited to 4096 states");
  const int n = chain.n;

  Eigen::MatrixXd S = symmetrize_dense(chain);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw NumericError("eigendecomposition failed in TV iteration");
  const Eigen::VectorXd lambda = es.eigenvalues();
  const Eigen::MatrixXd& U = es.eigenvectors();

  Eigen::VectorXd ex(n), exinv(n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(chain.log_pi[i]) > 1200.0)
      throw NumericError("stationary probabilities too extreme for TV iteration");
    ex[i] = std::exp(0.5 * chain.log_pi[i]);
    exinv[i] = std::exp(-0.5 * chain.log_pi[i]);
  }
  const Eigen::MatrixXd UL = exinv.asDiagonal() * U;
  const Eigen::MatrixXd UR = ex.asDiagonal() * U;
  const Eigen::VectorXd pi = pi_vector(chain);

  auto tv_at = [&](long m) -> double {
    if (m == 0) {
      double worst = 0.0;
      for (int x = 0; x < n; ++x) {
        double s = 1.0 - pi[x];  // sum_y |1{x=y} - pi_y| / 2 = 1 - pi_x
        worst = std::max(worst, s);
      }
      return worst;
    }
    Eigen::VectorXd lm(n);
    for (int j = 0; j < n; ++j)
      lm[j] = std::pow(lambda[j], static_cast<double>(m));
    const Eigen::MatrixXd P = UL * lm.asDiagonal() * UR.transpose();
    double worst = 0.0;
    for (int x = 0; x < n; ++x) {
      double s = 0.0;
      for (int y = 0; y < n; ++y) s += std::abs(P(x, y) - pi[y]);
      worst = std::max(worst, 0.5 * s);
    }
    return worst;
  };

  std::vector<std::pair<long, double>> evaluated;
  auto eval = [&](long m) {
    const double tv = tv_at(m);
    evaluated.emplace_back(m, tv);
    return tv;
  };

  TvMixingResult out;
  if (eval(0) <= epsilon) {
    out.tau = 0;
    out.tv_at_tau = evaluated.back().second;
    out.converged = true;
    return out;
  }
  long hi = 1;
  double tv_hi = eval(hi);
  while (tv_hi > epsilon) {
    if (hi > iteration_cap) {
      out.tau = hi;
      out.tv_at_tau = tv_hi;
      out.converged = false;
      return out;
    }
    hi *= 2;
    tv_hi = eval(hi);
  }
  long lo = hi / 2;  // tv(lo) > epsilon (or lo == 0)
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (eval(mid) <= epsilon)
      hi = mid;
    else
      lo = mid;
  }

  // The TV envelope of a lazy reversible chain is nonincreasing; check the
  // powers we actually evaluated.
  std::sort(evaluated.begin(), evaluated.end());
  for (std::size_t k = 1; k < evaluated.size(); ++k)
    if (evaluated[k].second > evaluated[k - 1].second + 1e-9)
      throw NumericError("TV distance not monotone across evaluated powers");

  out.tau = hi;
  out.tv_at_tau = tv_at(hi);
  out.converged = true;
  return out;
}

double conductance_of_set(const ReversibleChain& chain, const std::vector<int>& B) {
  std::vector<char> in_b(chain.n, 0);
  for (int v : B) in_b[v] = 1;
  double pi_b = 0.0, flow = 0.0;
  const Eigen::VectorXd pi = pi_vector(chain);
  for (int v = 0; v < chain.n; ++v)
    if (in_b[v]) pi_b += pi[v];
  if (!(pi_b > 0.0 && pi_b < 1.0))
    throw DimensionError("conductance_of_set: B must be a proper nonempty subset");
  for (int x = 0; x < chain.n; ++x) {
    if (!in_b[x]) continue;
    for (int y = 0; y < chain.n; ++y)
      if (!in_b[y]) flow += pi[x] * chain.entry(x, y);
  }
  return flow / (pi_b * (1.0 - pi_b));
}

ConductanceResult conductance_exact(const ReversibleChain& chain) {
  const int n = chain.n;
  if (n < 2) throw DimensionError("conductance: need at least 2 states");
  if (n > 30) throw ResourceError("exact conductance limited to 30 states");
  Eigen::MatrixXd T = chain.is_dense ? chain.dense : Eigen::MatrixXd(chain.sparse);
  const Eigen::VectorXd pi = pi_vector(chain);

  // Gray-code walk over subsets of {1..n-1}; state 0 stays in B^c, which
  // covers all proper subsets up to the complement symmetry of Phi.
  const std::uint32_t total = 1u << (n - 1);
  std::vector<char> in_b(n, 0);
  double pi_b = 0.0, flow = 0.0;
  double best = kPosInf;
  std::uint32_t best_mask = 0;
  std::uint32_t mask = 0;

  for (std::uint32_t g = 1; g < total; ++g) {
    const int bit = std::countr_zero(g);
    const int v = bit + 1;
    const bool adding = !in_b[v];
    in_b[v] = adding;
    mask ^= 1u << bit;
    double delta = 0.0;
    for (int y = 0; y < n; ++y) {
      if (y == v) continue;
      delta += in_b[y] ? -T(v, y) : T(v, y);
    }
    if (adding) {
      flow += pi[v] * delta;
      pi_b += pi[v];
    } else {
      flow -= pi[v] * delta;
      pi_b -= pi[v];
    }
    if ((g & 0xffffu) == 0) {
      // refresh the running sums to stop rounding drift
      flow = 0.0;
      pi_b = 0.0;
      for (int x = 0; x < n; ++x) {
        if (!in_b[x]) continue;
        pi_b += pi[x];
        for (int y = 0; y < n; ++y)
          if (!in_b[y]) flow += pi[x] * T(x, y);
      }
    }
    const double phi = flow / (pi_b * (1.0 - pi_b));
    if (phi < best) {
      best = phi;
      best_mask = mask;
    }
  }

  ConductanceResult out;
  out.phi = best;
  out.exact = true;
  for (int v = 1; v < n; ++v)
    if ((best_mask >> (v - 1)) & 1) out.cut.push_back(v);

  const double gap = spectral_gap(chain);
  if (gap > 2.0 * best + 1e-10)
    throw NumericError("Cheeger inequality Gap <= 2*Phi violated");
  return out;
}

ConductanceResult conductance_sweep(const ReversibleChain& chain) {
  const int n = chain.n;
  if (n < 2) throw DimensionError("conductance: need at least 2 states");
  SecondEigenpair ep = second_eigenpair(chain);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> score(n);
  for (int i = 0; i < n; ++i)
    score[i] = ep.vector[i] * std::exp(-0.5 * chain.log_pi[i]);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] < score[b];
    return a < b;
  });

  const Eigen::VectorXd pi = pi_vector(chain);
  std::vector<char> in_b(n, 0);
  double pi_b = 0.0, flow = 0.0;
  double best = kPosInf;
  int best_k = 0;
  for (int k = 0; k < n - 1; ++k) {
    const int v = order[k];
    double delta = 0.0;
    for (int y = 0; y < n; ++y) {
      if (y == v) continue;
      delta += in_b[y] ? -chain.entry(v, y) : chain.entry(v, y);
    }
    in_b[v] = 1;
    flow += pi[v] * delta;
    pi_b += pi[v];
    const double phi = flow / (pi_b * (1.0 - pi_b));
    if (phi < best) {
      best = phi;
      best_k = k + 1;
    }
  }
  ConductanceResult out;
  out.phi = best;
  out.exact = false;
  out.cut.assign(order.begin(), order.begin() + best_k);
  std::sort(out.cut.begin(), out.cut.end());
  return out;
}

ConductanceResult conductance(const ReversibleChain& chain, int max_exact_states) {
  if (chain.n <= max_exact_states) return conductance_exact(chain);
  return conductance_sweep(chain);
}

namespace {

struct Dsu {
  std::vector<int> parent, size;
  explicit Dsu(int n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
    return true;
  }
};

// Spanning tree whose unique paths maximize the minimum vertex weight
// (vertices activated in decreasing pi order, edges added on contact).
std::vector<std::vector<int>> bottleneck_tree(const ReversibleChain& chain) {
  const int n = chain.n;
  std::vector<std::vector<int>> adj(n), tree(n);
  for (const auto& [i, j] : chain.directed_edges()) adj[i].push_back(j);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (chain.log_pi[a] != chain.log_pi[b]) return chain.log_pi[a] > chain.log_pi[b];
    return a < b;
  });
  std::vector<char> active(n, 0);
  Dsu dsu(n);
  for (int v : order) {
    active[v] = 1;
    for (int u : adj[v]) {
      if (!active[u]) continue;
      if (dsu.unite(u, v)) {
        tree[v].push_back(u);
        tree[u].push_back(v);
      }
    }
  }
  int root = dsu.find(0);
  for (int v = 1; v < n; ++v)
    if (dsu.find(v) != root)
      throw StructuralError("transition graph is disconnected");
  return tree;
}

std::vector<int> tree_path(const std::vector<int>& parent,
                           const std::vector<int>& depth, int x, int y) {
  std::vector<int> left, right;
  int a = x, b = y;
  while (depth[a] > depth[b]) {
    left.push_back(a);
    a = parent[a];
  }
  while (depth[b] > depth[a]) {
    right.push_back(b);
    b = parent[b];
  }
  while (a != b) {
    left.push_back(a);
    right.push_back(b);
    a = parent[a];
    b = parent[b];
  }
  left.push_back(a);
  left.insert(left.end(), right.rbegin(), right.rend());
  return left;
}

}  // namespace

PathBoundResult path_bound_rho(const ReversibleChain& chain, PathChoice choice) {
  const int n = chain.n;
  if (n > 2048) throw ResourceError("path_bound_rho limited to 2048 states");
  const Eigen::VectorXd pi = pi_vector(chain);
  Eigen::MatrixXd load = Eigen::MatrixXd::Zero(n, n);

  if (choice == PathChoice::kBottleneck) {
    auto tree = bottleneck_tree(chain);
    std::vector<int> parent(n, -1), depth(n, 0);
    std::vector<int> stack{0};
    std::vector<char> seen(n, 0);
    seen[0] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : tree[v]) {
        if (seen[u]) continue;
        seen[u] = 1;
        parent[u] = v;
        depth[u] = depth[v] + 1;
        stack.push_back(u);
      }
    }
    for (int x = 0; x < n; ++x)
      for (int y = x + 1; y < n; ++y) {
        const auto path = tree_path(parent, depth, x, y);
        const double c = pi[x] * pi[y] * static_cast<double>(path.size() - 1);
        for (std::size_t t = 0; t + 1 < path.size(); ++t) {
          load(path[t], path[t + 1]) += c;
          load(path[t + 1], path[t]) += c;
        }
      }
  } else {
    std::vector<std::vector<int>> adj(n);
    for (const auto& [i, j] : chain.directed_edges()) adj[i].push_back(j);
    for (auto& a : adj) std::sort(a.begin(), a.end());
    for (int x = 0; x < n; ++x) {
      std::vector<int> parent(n, -1), dist(n, -1);
      std::queue<int> q;
      q.push(x);
      dist[x] = 0;
      while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int u : adj[v])
          if (dist[u] < 0) {
            dist[u] = dist[v] + 1;
            parent[u] = v;
            q.push(u);
          }
      }
      for (int y = 0; y < n; ++y) {
        if (y == x) continue;
        if (dist[y] < 0) throw StructuralError("transition graph is disconnected");
        const double c = pi[x] * pi[y] * dist[y];
        // walk parents: path is x -> ... -> y
        for (int v = y; v != x; v = parent[v]) load(parent[v], v) += c;
      }
    }
  }

  PathBoundResult out;
  for (const auto& [z, v] : chain.directed_edges()) {
    if (load(z, v) <= 0.0) continue;
    const double r = load(z, v) / (pi[z] * chain.entry(z, v));
    if (r > out.rho) {
      out.rho = r;
      out.worst_edge = {z, v};
    }
  }
  return out;
}

ReversibleChain restrict_chain(const ReversibleChain& chain,
                               const std::vector<int>& subset) {
  if (subset.empty()) throw DimensionError("restrict_chain: empty subset");
  const int m = static_cast<int>(subset.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  std::vector<double> lp(m);
  for (int a = 0; a < m; ++a) {
    double out_mass = 0.0;
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      T(a, b) = chain.entry(subset[a], subset[b]);
      out_mass += T(a, b);
    }
    T(a, a) = 1.0 - out_mass;  // rejected moves stay put
    lp[a] = chain.log_pi[subset[a]];
  }
  const double z = log_sum_exp(lp);
  for (auto& v : lp) v -= z;
  return make_chain_dense(std::move(T), std::move(lp));
}

ReversibleChain chain_power(const ReversibleChain& chain, int N) {
  if (N < 1) throw DimensionError("chain_power: N must be >= 1");
  Eigen::MatrixXd T = chain.is_dense ? chain.dense : Eigen::MatrixXd(chain.sparse);
  Eigen::MatrixXd P = T;
  for (int k = 1; k < N; ++k) P = P * T;
  return make_chain_dense(std::move(P), chain.log_pi);
}

LazyPowerReport lazy_power_gap_check(const ReversibleChain& chain, int N,
                                     double tol) {
  LazyPowerReport rep;
  rep.N = N;
  rep.gap_p = spectral_gap(chain);
  rep.gap_pn = spectral_gap(chain_power(chain, N));
  rep.slack = rep.gap_p - rep.gap_pn / N;
  rep.holds = rep.slack >= -tol;
  return rep;
}

ReversibleChain product_chain(const std::vector<ReversibleChain>& components,
                              const std::vector<double>& weights) {
  if (components.empty() || components.size() != weights.size())
    throw DimensionError("product_chain: components/weights mismatch");
  double wsum = 0.0;
  for (double b : weights) {
    if (!(b > 0.0)) throw DimensionError("product_chain: weights must be > 0");
    wsum += b;
  }
  if (std::abs(wsum - 1.0) > 1e-12)
    throw DimensionError("product_chain: weights must sum to 1");
  long n = 1;
  for (const auto& c : components) {
    n *= c.n;
    if (n > 4096) throw ResourceError("product_chain limited to 4096 states");
  }
  const int K = static_cast<int>(components.size());
  std::vector<long> stride(K);
  long acc = 1;
  for (int k = 0; k < K; ++k) {
    stride[k] = acc;
    acc *= components[k].n;
  }
  auto digit = [&](long x, int k) {
    return static_cast<int>((x / stride[k]) % components[k].n);
  };

  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> lp(n, 0.0);
  for (long x = 0; x < n; ++x) {
    double diag = 0.0;
    for (int k = 0; k < K; ++k) {
      const int xk = digit(x, k);
      lp[x] += components[k].log_pi[xk];
      for (int yk = 0; yk < components[k].n; ++yk) {
        const double p = components[k].entry(xk, yk);
        if (p <= 0.0) continue;
        if (yk == xk)
          diag += weights[k] * p;
        else
          T(x, x + (yk - xk) * stride[k]) += weights[k] * p;
      }
    }
    T(x, x) = diag;
  }
  return make_chain_dense(std::move(T), std::move(lp));
}

void write_matrix_coo(const ReversibleChain& chain, std::ostream& os) {
  os.precision(17);
  os << "# rows cols nnz\n";
  std::vector<std::tuple<int, int, double>> entries;
  if (chain.is_dense) {
    for (int i = 0; i < chain.n; ++i)
      for (int j = 0; j < chain.n; ++j)
        if (chain.dense(i, j) != 0.0) entries.emplace_back(i, j, chain.dense(i, j));
  } else {
    for (int i = 0; i < chain.sparse.outerSize(); ++i)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
               chain.sparse, i);
           it; ++it)
        entries.emplace_back(it.row(), it.col(), it.value());
  }
  os << chain.n << ' ' << chain.n << ' ' << entries.size() << '\n';
  for (const auto& [i, j, v] : entries) os << i << ' ' << j << ' ' << v << '\n';
}

}  // namespace motifmix
