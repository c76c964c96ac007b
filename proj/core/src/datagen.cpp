#include "motifmix/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "motifmix/util.hpp"

namespace motifmix {

double GenerativeModel::background_mass() const {
  double s = 0.0;
  for (double p : motif_freqs) s += p;
  return 1.0 - s;
}

void GenerativeModel::validate() const {
  if (w <= 0 || M < 2) throw DimensionError("GenerativeModel: bad (w,M)");
  if (static_cast<int>(motif_freqs.size()) != J ||
      static_cast<int>(motif_matrices.size()) != J)
    throw DimensionError("GenerativeModel: J mismatch");
  double total = 0.0;
  for (double p : motif_freqs) {
    if (!(p > 0.0)) throw DimensionError("GenerativeModel: motif freq <= 0");
    total += p;
  }
  if (!(total < 1.0)) throw DimensionError("GenerativeModel: sum p_j must be < 1");
  if (static_cast<int>(background.size()) != M)
    throw DimensionError("GenerativeModel: background length != M");
  double bs = 0.0;
  for (double v : background) {
    if (!(v > 0.0)) throw DimensionError("GenerativeModel: background entries must be > 0");
    bs += v;
  }
  if (std::abs(bs - 1.0) > 1e-9)
    throw DimensionError("GenerativeModel: background does not sum to 1");
  for (const auto& mat : motif_matrices) {
    if (static_cast<int>(mat.size()) != w)
      throw DimensionError("GenerativeModel: motif matrix has wrong width");
    for (const auto& col : mat) {
      if (static_cast<int>(col.size()) != M)
        throw DimensionError("GenerativeModel: motif column length != M");
      double cs = 0.0;
      for (double v : col) {
        if (v < 0.0) throw DimensionError("GenerativeModel: negative frequency");
        cs += v;
      }
      if (std::abs(cs - 1.0) > 1e-9)
        throw DimensionError("GenerativeModel: motif column does not sum to 1");
    }
  }
}

GenerativeModel GenerativeModel::background_only(int w, int M,
                                                 std::vector<double> theta0) {
  GenerativeModel g;
  g.J = 0;
  g.w = w;
  g.M = M;
  g.background = std::move(theta0);
  g.validate();
  return g;
}

GenerativeModel GenerativeModel::deterministic(
    int w, int M, const std::vector<std::vector<Symbol>>& words,
    const std::vector<double>& freqs, std::vector<double> theta0) {
  GenerativeModel g;
  g.J = static_cast<int>(words.size());
  g.w = w;
  g.M = M;
  g.motif_freqs = freqs;
  g.background = std::move(theta0);
  for (const auto& word : words) {
    if (static_cast<int>(word.size()) != w)
      throw DimensionError("deterministic motif word has wrong length");
    std::vector<std::vector<double>> mat(w, std::vector<double>(M, 0.0));
    for (int k = 0; k < w; ++k) mat[k][word[k] - 1] = 1.0;
    g.motif_matrices.push_back(std::move(mat));
  }
  g.validate();
  return g;
}

double DeterministicMotifSet::min_disagreement(int w) const {
  double best = 1.0;
  for (std::size_t a = 0; a < words.size(); ++a)
    for (std::size_t b = a + 1; b < words.size(); ++b) {
      int diff = 0;
      for (int k = 0; k < w; ++k) diff += words[a][k] != words[b][k];
      best = std::min(best, static_cast<double>(diff) / w);
    }
  return best;
}

void DeterministicMotifSet::validate(int w, int M) const {
  for (const auto& word : words) {
    if (static_cast<int>(word.size()) != w)
      throw DimensionError("DeterministicMotifSet: word length != w");
    for (Symbol s : word)
      if (s < 1 || s > M) throw DimensionError("DeterministicMotifSet: bad symbol");
  }
  if (words.size() > 1 && !(min_disagreement(w) > 0.0))
    throw DimensionError("DeterministicMotifSet: two motifs coincide");
}

double generative_pmf(const GenerativeModel& gen, const std::vector<Symbol>& word) {
  if (static_cast<int>(word.size()) != gen.w)
    throw DimensionError("generative_pmf: word length != w");
  double density = 0.0;
  for (int j = 0; j < gen.J; ++j) {
    double prod = gen.motif_freqs[j];
    for (int k = 0; k < gen.w; ++k) prod *= gen.motif_matrices[j][k][word[k] - 1];
    density += prod;
  }
  double bg = gen.background_mass();
  for (int k = 0; k < gen.w; ++k) bg *= gen.background[word[k] - 1];
  return density + bg;
}

double generative_pmf(const GenerativeModel& gen, WordIndex word) {
  return generative_pmf(gen, index_to_word(word, gen.w, gen.M));
}

std::pair<Sequence, std::vector<int>> sample_sequence(const GenerativeModel& gen,
                                                      int n_blocks,
                                                      CounterRng& rng) {
  gen.validate();
  if (n_blocks < 1) throw DimensionError("sample_sequence: n_blocks must be >= 1");
  std::vector<double> type_probs(gen.J + 1);
  for (int j = 0; j < gen.J; ++j) type_probs[j] = gen.motif_freqs[j];
  type_probs[gen.J] = gen.background_mass();

  std::vector<Symbol> symbols;
  symbols.reserve(static_cast<std::size_t>(n_blocks) * gen.w);
  std::vector<int> labels(n_blocks, 0);
  for (int i = 0; i < n_blocks; ++i) {
    const int type = rng.next_categorical(type_probs.data(), gen.J + 1);
    labels[i] = type == gen.J ? 0 : type + 1;
    for (int k = 0; k < gen.w; ++k) {
      const double* col = type == gen.J ? gen.background.data()
                                        : gen.motif_matrices[type][k].data();
      symbols.push_back(static_cast<Symbol>(rng.next_categorical(col, gen.M) + 1));
    }
  }
  return {Sequence(std::move(symbols), gen.w, gen.M), std::move(labels)};
}

std::pair<Sequence, std::vector<int>> sample_sequence(const GenerativeModel& gen,
                                                      int n_blocks,
                                                      std::uint64_t seed,
                                                      std::uint64_t stream) {
  CounterRng rng(seed, stream);
  return sample_sequence(gen, n_blocks, rng);
}

double simulate_median_max(double a, int M, int mc_samples, CounterRng& rng) {
  std::vector<double> maxima(mc_samples);
  std::vector<double> theta(M);
  for (int i = 0; i < mc_samples; ++i) {
    rng.next_dirichlet_sym(a, M, theta.data());
    maxima[i] = *std::max_element(theta.begin(), theta.end());
  }
  auto mid = maxima.begin() + mc_samples / 2;
  std::nth_element(maxima.begin(), mid, maxima.end());
  return *mid;
}

double calibrate_dirichlet_concentration(double target_median_max, int M,
                                         int mc_samples, std::uint64_t seed) {
  if (!(target_median_max > 1.0 / M && target_median_max < 1.0))
    throw std::domain_error("calibrate: target must lie in (1/M, 1)");
  if (mc_samples < 100) throw DimensionError("calibrate: mc_samples too small");
  CounterRng base(seed);

  double lo = 1e-4, hi = 1e4;
  // median_max is decreasing in a: f(lo) > target > f(hi) must bracket.
  {
    CounterRng r1 = base.substream(0);
    CounterRng r2 = base.substream(1);
    const double f_lo = simulate_median_max(lo, M, mc_samples, r1);
    const double f_hi = simulate_median_max(hi, M, mc_samples, r2);
    if (!(f_lo > target_median_max && f_hi < target_median_max))
      throw NumericError("calibrate: bisection bracket failed");
  }
  double a = std::sqrt(lo * hi);
  for (int iter = 0; iter < 60 && hi / lo > 1.0 + 1e-4; ++iter) {
    a = std::sqrt(lo * hi);  // bisect in log space
    CounterRng r = base.substream(2 + iter);
    const double med = simulate_median_max(a, M, mc_samples, r);
    if (med > target_median_max)
      lo = a;
    else
      hi = a;
  }
  a = std::sqrt(lo * hi);
  CounterRng verify = base.substream(1000);
  const double med = simulate_median_max(a, M, std::max(mc_samples, 100000), verify);
  if (std::abs(med - target_median_max) > 0.005)
    throw NumericError("calibrate: solution outside +/-0.005 of target (" +
                       std::to_string(med) + " vs " +
                       std::to_string(target_median_max) + ")");
  return a;
}

GenerativeModel sample_study_model(int J, int w, int M,
                                   const std::vector<double>& motif_freqs,
                                   double a0, double a1, CounterRng& rng) {
  GenerativeModel g;
  g.J = J;
  g.w = w;
  g.M = M;
  g.motif_freqs = motif_freqs;
  g.background = rng.next_dirichlet_sym(a0, M);
  g.motif_matrices.resize(J);
  for (int j = 0; j < J; ++j) {
    g.motif_matrices[j].resize(w);
    for (int k = 0; k < w; ++k)
      g.motif_matrices[j][k] = rng.next_dirichlet_sym(a1, M);
  }
  g.validate();
  return g;
}

}  // namespace motifmix
