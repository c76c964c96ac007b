#include "motifmix/types.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace motifmix {

Sequence::Sequence(std::vector<Symbol> symbols, int w, int M, int* truncated)
    : symbols_(std::move(symbols)), w_(w), M_(M) {
  if (w <= 0) throw DimensionError("Sequence: w must be positive");
  if (M < 2 || M > 255) throw DimensionError("Sequence: M must be in [2,255]");
  const std::size_t tail = symbols_.size() % static_cast<std::size_t>(w);
  if (truncated) *truncated = static_cast<int>(tail);
  if (tail != 0) symbols_.resize(symbols_.size() - tail);
  if (symbols_.empty()) throw DimensionError("Sequence: no complete block");
  for (Symbol s : symbols_)
    if (s < 1 || s > M)
      throw DimensionError("Sequence: symbol " + std::to_string(int(s)) +
                           " outside 1.." + std::to_string(M));
  block_words_.resize(symbols_.size() / w);
  for (int i = 0; i < n_blocks(); ++i) {
    WordIndex idx = 0;
    WordIndex pw = 1;
    for (int k = 0; k < w_; ++k) {
      idx += static_cast<WordIndex>(at(i, k) - 1) * pw;
      pw *= M_;
    }
    block_words_[i] = idx;
  }
}

Sequence Sequence::from_ints(const std::vector<int>& symbols, int w, int M,
                             int* truncated) {
  std::vector<Symbol> s;
  s.reserve(symbols.size());
  for (int v : symbols) {
    if (v < 1 || v > 255) throw DimensionError("Sequence: symbol out of range");
    s.push_back(static_cast<Symbol>(v));
  }
  return Sequence(std::move(s), w, M, truncated);
}

WordIndex word_to_index(const std::vector<Symbol>& word, int M) {
  WordIndex idx = 0;
  WordIndex pw = 1;
  for (Symbol s : word) {
    if (s < 1 || s > M) throw DimensionError("word_to_index: symbol out of range");
    idx += static_cast<WordIndex>(s - 1) * pw;
    pw *= M;
  }
  return idx;
}

std::vector<Symbol> index_to_word(WordIndex idx, int w, int M) {
  std::vector<Symbol> word(static_cast<std::size_t>(w));
  for (int k = 0; k < w; ++k) {
    word[k] = static_cast<Symbol>(idx % M + 1);
    idx /= M;
  }
  return word;
}

WordIndex word_space_size(int w, int M) {
  WordIndex n = 1;
  for (int k = 0; k < w; ++k) {
    if (n > std::numeric_limits<WordIndex>::max() / M)
      throw ResourceError("word space M^w overflows 64-bit index");
    n *= M;
  }
  return n;
}

ModelParams ModelParams::flat(int w, int M, double p0, double b) {
  ModelParams p;
  p.p0 = p0;
  p.beta.assign(static_cast<std::size_t>(w) + 1,
                std::vector<double>(static_cast<std::size_t>(M), b));
  p.validate();
  return p;
}

double ModelParams::beta_row_sum(int k) const {
  double s = 0.0;
  for (double b : beta[k]) s += b;
  return s;
}

void ModelParams::validate() const {
  if (!(p0 > 0.0 && p0 < 1.0))
    throw DimensionError("ModelParams: p0 must lie strictly inside (0,1)");
  if (beta.size() < 2) throw DimensionError("ModelParams: beta needs w+1 rows");
  const std::size_t M = beta[0].size();
  for (const auto& row : beta) {
    if (row.size() != M) throw DimensionError("ModelParams: ragged beta rows");
    for (double b : row)
      if (!(b > 0.0)) throw DimensionError("ModelParams: beta entries must be > 0");
  }
}

ThetaMatrix ThetaMatrix::uniform(int w, int M) {
  ThetaMatrix t;
  t.rows.assign(static_cast<std::size_t>(w) + 1,
                std::vector<double>(static_cast<std::size_t>(M), 1.0 / M));
  return t;
}

void ThetaMatrix::validate(double tol) const {
  if (rows.size() < 2) throw DimensionError("ThetaMatrix: needs w+1 rows");
  const std::size_t M = rows[0].size();
  for (const auto& row : rows) {
    if (row.size() != M) throw DimensionError("ThetaMatrix: ragged rows");
    double s = 0.0;
    for (double v : row) {
      if (v < 0.0) throw DimensionError("ThetaMatrix: negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > tol)
      throw DimensionError("ThetaMatrix: row does not sum to 1");
  }
}

}  // namespace motifmix
