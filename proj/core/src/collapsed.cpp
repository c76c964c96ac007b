#include "motifmix/collapsed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <ostream>
#include <string>
#include <unordered_map>

#include "motifmix/model.hpp"
#include "motifmix/util.hpp"

namespace motifmix {

int WordCountTable::find(WordIndex word) const {
  auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) return -1;
  return static_cast<int>(it - words.begin());
}

long WordCountTable::total() const {
  long t = 0;
  for (int c : counts) t += c;
  return t;
}

WordCountTable sequence_counts(const Sequence& seq) {
  std::vector<WordIndex> sorted(seq.block_words());
  std::sort(sorted.begin(), sorted.end());
  WordCountTable table;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    table.words.push_back(sorted[i]);
    table.counts.push_back(static_cast<int>(j - i));
    i = j;
  }
  return table;
}

CollapsedState collapse(const Sequence& seq, const Assignment& A) {
  if (A.size() != seq.n_blocks())
    throw DimensionError("collapse: assignment length mismatch");
  WordCountTable table = sequence_counts(seq);
  CollapsedState state;
  state.words = table.words;
  state.c.assign(table.words.size(), 0);
  for (int i = 0; i < seq.n_blocks(); ++i) {
    if (!A.bits[i]) continue;
    state.c[table.find(seq.block_word(i))]++;
  }
  return state;
}

std::vector<int> CollapsedChain::decode(std::size_t idx) const {
  std::vector<int> c(table.words.size());
  for (std::size_t s = 0; s < table.words.size(); ++s) {
    const std::size_t radix = static_cast<std::size_t>(table.counts[s]) + 1;
    c[s] = static_cast<int>((idx / stride[s]) % radix);
  }
  return c;
}

std::size_t CollapsedChain::encode(const std::vector<int>& c) const {
  if (c.size() != table.words.size())
    throw DimensionError("CollapsedChain::encode: wrong coordinate count");
  std::size_t idx = 0;
  for (std::size_t s = 0; s < c.size(); ++s) {
    if (c[s] < 0 || c[s] > table.counts[s])
      throw DimensionError("CollapsedChain::encode: coordinate out of range");
    idx += static_cast<std::size_t>(c[s]) * stride[s];
  }
  return idx;
}

std::size_t CollapsedChain::state_of(const CollapsedState& state) const {
  if (state.words != table.words)
    throw DimensionError("CollapsedChain::state_of: word table mismatch");
  return encode(state.c);
}

ReversibleChain CollapsedChain::to_reversible_chain() const {
  if (!has_matrix)
    throw ResourceError("CollapsedChain: transition matrix was not built");
  ReversibleChain chain;
  chain.n = static_cast<int>(n_states);
  chain.log_pi = log_pi;
  chain.is_dense = false;
  chain.sparse = transitions;
  chain.verify(1e-12, 1e-10);
  return chain;
}

namespace {

// Everything needed to evaluate log pi_bar and the conditional update
// probabilities from integer count states via table lookups only.
struct CollapsedWorkspace {
  int w = 0, M = 0, n_blocks = 0, W = 0;
  long L = 0;
  const ModelParams* params = nullptr;
  std::vector<std::vector<Symbol>> word_symbols;  // W x w
  std::vector<long> totals;                       // N(S)_m

  // lgamma tables (integer count + fixed hyperparameter offsets)
  std::vector<std::vector<double>> lg_motif;  // (k*M+m) -> [0..n_blocks]
  std::vector<std::vector<double>> lg_motif_abs;  // k -> [0..n_blocks]
  std::vector<std::vector<double>> lg_bg;         // m -> [0..L]
  std::vector<double> lg_bg_abs;                  // [0..L]
  std::vector<double> log_prior;                  // [0..n_blocks]
  std::vector<std::vector<double>> log_choose;    // s -> [0..C_s]

  // mutable enumeration state
  std::vector<int> digits;        // c_s per word
  std::vector<long> motif_counts; // w x M
  std::vector<long> bg_counts;    // M
  long abs_A = 0;

  void init(const Sequence& seq, const WordCountTable& table,
            const ModelParams& p) {
    w = seq.w();
    M = seq.M();
    n_blocks = seq.n_blocks();
    L = seq.L();
    W = table.n_words();
    params = &p;
    word_symbols.resize(W);
    for (int s = 0; s < W; ++s)
      word_symbols[s] = index_to_word(table.words[s], w, M);
    totals.assign(M, 0);
    for (Symbol sym : seq.symbols()) totals[sym - 1]++;

    lg_motif.assign(static_cast<std::size_t>(w) * M, {});
    for (int k = 0; k < w; ++k)
      for (int m = 0; m < M; ++m) {
        auto& tab = lg_motif[k * M + m];
        tab.resize(n_blocks + 1);
        for (int c = 0; c <= n_blocks; ++c)
          tab[c] = std::lgamma(c + p.beta[k + 1][m]);
      }
    lg_motif_abs.assign(w, {});
    for (int k = 0; k < w; ++k) {
      lg_motif_abs[k].resize(n_blocks + 1);
      for (int a = 0; a <= n_blocks; ++a)
        lg_motif_abs[k][a] = std::lgamma(a + p.beta_row_sum(k + 1));
    }
    lg_bg.assign(M, {});
    for (int m = 0; m < M; ++m) {
      lg_bg[m].resize(L + 1);
      for (long c = 0; c <= L; ++c) lg_bg[m][c] = std::lgamma(c + p.beta[0][m]);
    }
    lg_bg_abs.resize(L + 1);
    for (long t = 0; t <= L; ++t) lg_bg_abs[t] = std::lgamma(t + p.beta_row_sum(0));
    log_prior.resize(n_blocks + 1);
    for (int a = 0; a <= n_blocks; ++a)
      log_prior[a] = a * std::log(p.p0) + (n_blocks - a) * std::log1p(-p.p0);
    log_choose.resize(W);
    for (int s = 0; s < W; ++s) {
      const int C = table.counts[s];
      log_choose[s].resize(C + 1);
      for (int c = 0; c <= C; ++c)
        log_choose[s][c] = std::lgamma(C + 1.0) - std::lgamma(c + 1.0) -
                           std::lgamma(C - c + 1.0);
    }

    digits.assign(W, 0);
    motif_counts.assign(static_cast<std::size_t>(w) * M, 0);
    bg_counts = totals;
    abs_A = 0;
  }

  void add_word(int s, int copies) {
    for (int k = 0; k < w; ++k) {
      const int m = word_symbols[s][k] - 1;
      motif_counts[k * M + m] += copies;
      bg_counts[m] -= copies;
    }
    abs_A += copies;
  }

  // log pi_bar(c) up to the normalizing constant, current enumeration state.
  double log_pi_bar_unnorm() const {
    double lp = log_prior[abs_A];
    for (int s = 0; s < W; ++s) lp += log_choose[s][digits[s]];
    for (int k = 0; k < w; ++k) {
      lp -= lg_motif_abs[k][abs_A];
      for (int m = 0; m < M; ++m) lp += lg_motif[k * M + m][motif_counts[k * M + m]];
    }
    for (int m = 0; m < M; ++m) lp += lg_bg[m][bg_counts[m]];
    lp -= lg_bg_abs[L - static_cast<long>(w) * abs_A];
    return lp;
  }

  // pi(A_i=1 | rest) for a block with word s, where the rest of the
  // assignment is the current enumeration state shifted by `shift` copies
  // of word s (shift = -1 evaluates at c - e_s).
  double site_prob_one(int s, int shift) const {
    const auto& sym = word_symbols[s];
    const long rest_ones = abs_A + shift;
    double a = params->p0;
    for (int k = 0; k < w; ++k) {
      const int m = sym[k] - 1;
      long nk = motif_counts[k * M + m] + shift;
      a *= (nk + params->beta[k + 1][m]) /
           (rest_ones + params->beta_row_sum(k + 1));
    }
    // background with the block itself counted as motif
    double b = 1.0 - params->p0;
    const long bg_abs1 = L - static_cast<long>(w) * (rest_ones + 1);
    double bg1_total = bg_abs1 + params->beta_row_sum(0);
    int offs_small[16] = {0};
    std::vector<int> offs_big;
    int* offs = offs_small;
    if (M > 16) {
      offs_big.assign(M, 0);
      offs = offs_big.data();
    }
    // per-symbol background counts at A_i=1: subtract the block and any
    // shifted copies of word s from the running background tallies
    for (int k = 0; k < w; ++k) {
      const int m = sym[k] - 1;
      long bg1_m = bg_counts[m];
      for (int kk = 0; kk < w; ++kk)
        if (sym[kk] - 1 == m) bg1_m -= 1 + shift;
      b *= (bg1_m + params->beta[0][m] + offs[m]) / (bg1_total + k);
      offs[m]++;
    }
    const double total = a + b;
    if (total > 0.0 && std::isfinite(total)) return a / total;
    // log-space fallback
    double lo = std::log(params->p0) - std::log1p(-params->p0);
    for (int k = 0; k < w; ++k) {
      const int m = sym[k] - 1;
      lo += std::log(motif_counts[k * M + m] + shift + params->beta[k + 1][m]) -
            std::log(rest_ones + params->beta_row_sum(k + 1));
    }
    std::vector<int> off2(M, 0);
    for (int k = 0; k < w; ++k) {
      const int m = sym[k] - 1;
      long bg1_m = bg_counts[m];
      for (int kk = 0; kk < w; ++kk)
        if (sym[kk] - 1 == m) bg1_m -= 1 + shift;
      lo -= std::log(bg1_m + params->beta[0][m] + off2[m]) -
            std::log(bg1_total + k);
      off2[m]++;
    }
    return sigmoid(lo);
  }
};

CollapsedChain make_skeleton(const Sequence& seq, const ModelParams& params,
                             const CollapsedOptions& opts) {
  params.validate();
  if (params.w() != seq.w() || params.M() != seq.M())
    throw DimensionError("collapsed chain: params (w,M) do not match sequence");
  CollapsedChain chain;
  chain.table = sequence_counts(seq);
  chain.n_blocks = seq.n_blocks();
  chain.w = seq.w();
  chain.M = seq.M();
  const int W = chain.table.n_words();
  chain.stride.resize(W);
  std::size_t n = 1;
  for (int s = 0; s < W; ++s) {
    chain.stride[s] = n;
    n *= static_cast<std::size_t>(chain.table.counts[s]) + 1;
    if (n > opts.state_budget)
      throw ResourceError("collapsed space exceeds state budget of " +
                          std::to_string(opts.state_budget) + " states");
  }
  chain.n_states = n;
  return chain;
}

// Runs fn(idx) for every state in odometer order with ws.digits/counts kept
// in sync.
template <typename Fn>
void enumerate_states(const CollapsedChain& chain, CollapsedWorkspace& ws, Fn&& fn) {
  const int W = chain.table.n_words();
  for (std::size_t idx = 0;; ++idx) {
    fn(idx);
    int s = 0;
    while (s < W) {
      if (ws.digits[s] < chain.table.counts[s]) {
        ws.digits[s]++;
        ws.add_word(s, 1);
        break;
      }
      ws.add_word(s, -ws.digits[s]);
      ws.digits[s] = 0;
      ++s;
    }
    if (s == W) break;
  }
}

}  // namespace

CollapsedChain collapsed_posterior(const Sequence& seq, const ModelParams& params,
                                   const CollapsedOptions& opts) {
  CollapsedChain chain = make_skeleton(seq, params, opts);
  CollapsedWorkspace ws;
  ws.init(seq, chain.table, params);

  chain.log_pi.resize(chain.n_states);
  double max_lp = kNegInf;
  enumerate_states(chain, ws, [&](std::size_t idx) {
    const double lp = ws.log_pi_bar_unnorm();
    chain.log_pi[idx] = lp;
    if (lp > max_lp) max_lp = lp;
  });
  double z = 0.0;
  for (double lp : chain.log_pi) z += std::exp(lp - max_lp);
  const double log_z = max_lp + std::log(z);
  for (double& lp : chain.log_pi) lp -= log_z;
  return chain;
}

CollapsedChain projection_matrix(const Sequence& seq, const ModelParams& params,
                                 const CollapsedOptions& opts) {
  CollapsedChain chain = collapsed_posterior(seq, params, opts);
  if (chain.n_states > opts.matrix_budget)
    throw ResourceError("collapsed transition matrix exceeds budget of " +
                        std::to_string(opts.matrix_budget) + " states");
  CollapsedWorkspace ws;
  ws.init(seq, chain.table, params);

  const int W = chain.table.n_words();
  const double half_site = 0.5 / chain.n_blocks;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(chain.n_states * (2 * W + 1));
  enumerate_states(chain, ws, [&](std::size_t idx) {
    double diag = 1.0;
    for (int s = 0; s < W; ++s) {
      const int c_s = ws.digits[s];
      const int C_s = chain.table.counts[s];
      if (c_s > 0) {
        const double p1 = ws.site_prob_one(s, -1);
        const double down = half_site * c_s * (1.0 - p1);
        trips.emplace_back(static_cast<int>(idx),
                           static_cast<int>(idx - chain.stride[s]), down);
        diag -= down;
      }
      if (c_s < C_s) {
        const double p1 = ws.site_prob_one(s, 0);
        const double up = half_site * (C_s - c_s) * p1;
        trips.emplace_back(static_cast<int>(idx),
                           static_cast<int>(idx + chain.stride[s]), up);
        diag -= up;
      }
    }
    trips.emplace_back(static_cast<int>(idx), static_cast<int>(idx), diag);
  });

  Eigen::SparseMatrix<double, Eigen::RowMajor> T(
      static_cast<int>(chain.n_states), static_cast<int>(chain.n_states));
  T.setFromTriplets(trips.begin(), trips.end());
  chain.transitions = std::move(T);
  chain.has_matrix = true;
  chain.to_reversible_chain();  // verifies stochasticity + detailed balance
  return chain;
}

namespace {

struct SortEntry {
  std::uint64_t key;  // order-preserving transform of -log_pi (ascending)
  std::uint32_t idx;
};

std::uint64_t order_key(double x) {
  std::uint64_t u = std::bit_cast<std::uint64_t>(x);
  if (u >> 63)
    u = ~u;
  else
    u |= 0x8000000000000000ULL;
  return u;
}

struct Dsu32 {
  std::vector<std::int32_t> parent;  // -1: inactive
  std::vector<std::int32_t> size;
  explicit Dsu32(std::size_t n) : parent(n, -1), size(n, 0) {}
  bool active(std::uint32_t x) const { return parent[x] >= 0; }
  void activate(std::uint32_t x) {
    parent[x] = static_cast<std::int32_t>(x);
    size[x] = 1;
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != static_cast<std::int32_t>(x)) {
      parent[x] = parent[parent[x]];
      x = static_cast<std::uint32_t>(parent[x]);
    }
    return x;
  }
  // returns the surviving root
  std::uint32_t unite(std::uint32_t a, std::uint32_t b) {
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = static_cast<std::int32_t>(a);
    size[a] += size[b];
    return a;
  }
};

}  // namespace

BottleneckResult bottleneck_d(const CollapsedChain& chain, bool restricted,
                              int top_k) {
  const std::size_t n = chain.n_states;
  if (n < 2) throw StructuralError("bottleneck_d: need at least 2 states");
  if (n > 0xffffffffULL) throw ResourceError("bottleneck_d: too many states");
  if (restricted && top_k < 2)
    throw DimensionError("bottleneck_d: top_k must be >= 2");
  const std::vector<double>& lp = chain.log_pi;
  const int W = chain.table.n_words();

  std::vector<SortEntry> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = {order_key(-lp[i]), static_cast<std::uint32_t>(i)};
  std::sort(order.begin(), order.end(), [](const SortEntry& a, const SortEntry& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.idx < b.idx;
  });

  // membership of the top_k most probable states, tracked per component
  std::vector<char> is_top(restricted ? n : 0, 0);
  if (restricted)
    for (int t = 0; t < top_k && t < static_cast<int>(n); ++t)
      is_top[order[t].idx] = 1;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> top_members;

  Dsu32 dsu(n);
  std::vector<std::uint32_t> arg_max(n, 0);  // per root: state of max pi_bar

  BottleneckResult full, topk;
  full.log_d = kPosInf;
  topk.log_d = kPosInf;

  for (const SortEntry& entry : order) {
    const std::uint32_t v = entry.idx;
    dsu.activate(v);
    arg_max[v] = v;
    if (restricted && is_top[v]) top_members[v] = {v};

    for (int s = 0; s < W; ++s) {
      const std::size_t radix = static_cast<std::size_t>(chain.table.counts[s]) + 1;
      const std::size_t digit = (v / chain.stride[s]) % radix;
      for (int dir = -1; dir <= 1; dir += 2) {
        if (dir < 0 && digit == 0) continue;
        if (dir > 0 && digit + 1 == radix) continue;
        const std::uint32_t u = static_cast<std::uint32_t>(
            dir < 0 ? v - chain.stride[s] : v + chain.stride[s]);
        if (!dsu.active(u)) continue;
        std::uint32_t ru = dsu.find(u);
        std::uint32_t rv = dsu.find(v);
        if (ru == rv) continue;
        // all pairs crossing this merge have maximin value pi_bar(v)
        const double log_b = lp[v];
        {
          const std::uint32_t a = arg_max[ru];
          const std::uint32_t b = arg_max[rv];
          const double cand = log_b - lp[a] - lp[b];
          if (cand < full.log_d) {
            full.log_d = cand;
            full.state1 = a;
            full.state2 = b;
            full.bottleneck_state = v;
            full.log_bottleneck = log_b;
          }
        }
        if (restricted) {
          auto it_u = top_members.find(ru);
          auto it_v = top_members.find(rv);
          if (it_u != top_members.end() && it_v != top_members.end()) {
            for (std::uint32_t a : it_u->second)
              for (std::uint32_t b : it_v->second) {
                const double cand = log_b - lp[a] - lp[b];
                if (cand < topk.log_d) {
                  topk.log_d = cand;
                  topk.state1 = a;
                  topk.state2 = b;
                  topk.bottleneck_state = v;
                  topk.log_bottleneck = log_b;
                }
              }
          }
        }
        const std::uint32_t winner = dsu.unite(ru, rv);
        const std::uint32_t loser = winner == ru ? rv : ru;
        if (lp[arg_max[loser]] > lp[arg_max[winner]] ||
            (lp[arg_max[loser]] == lp[arg_max[winner]] &&
             arg_max[loser] < arg_max[winner]))
          arg_max[winner] = arg_max[loser];
        if (restricted) {
          auto it_l = top_members.find(loser);
          if (it_l != top_members.end()) {
            auto& dst = top_members[winner];
            dst.insert(dst.end(), it_l->second.begin(), it_l->second.end());
            top_members.erase(loser);
          }
        }
      }
    }
  }

  if (static_cast<std::size_t>(dsu.size[dsu.find(order[0].idx)]) != n)
    throw StructuralError("bottleneck_d: transition graph is disconnected");

  BottleneckResult out = restricted ? topk : full;
  out.restricted = restricted;
  out.top_k = restricted ? top_k : 0;
  out.d = std::exp(out.log_d);
  return out;
}

void write_pi_csv(const CollapsedChain& chain, std::ostream& os) {
  const int W = chain.table.n_words();
  os << "state";
  for (int s = 0; s < W; ++s) {
    os << ",c_";
    for (Symbol sym : index_to_word(chain.table.words[s], chain.w, chain.M))
      os << int(sym);
  }
  os << ",log_pi_bar\n";
  os.precision(17);
  for (std::size_t idx = 0; idx < chain.n_states; ++idx) {
    os << idx;
    for (int s = 0; s < W; ++s) {
      const std::size_t radix = static_cast<std::size_t>(chain.table.counts[s]) + 1;
      os << ',' << (idx / chain.stride[s]) % radix;
    }
    os << ',' << chain.log_pi[idx] << '\n';
  }
}

void write_transitions_coo(const CollapsedChain& chain, std::ostream& os) {
  if (!chain.has_matrix)
    throw ResourceError("write_transitions_coo: no transition matrix");
  os.precision(17);
  os << "# rows cols nnz\n";
  os << chain.n_states << ' ' << chain.n_states << ' '
     << chain.transitions.nonZeros() << '\n';
  for (int i = 0; i < chain.transitions.outerSize(); ++i)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(
             chain.transitions, i);
         it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace motifmix
