#ifndef MOTIFMIX_TYPES_HPP
#define MOTIFMIX_TYPES_HPP

#include <cstdint>
#include <vector>

#include "motifmix/util.hpp"

namespace motifmix {

using Symbol = std::uint8_t;      // 1..M
using WordIndex = std::int64_t;   // base-M encoding of a length-w word

// Observed symbol string, pre-split into L/w width-w blocks. Block indices
// are 0-based throughout the library.
class Sequence {
 public:
  // Validates symbols in 1..M. If the raw length is not divisible by w the
  // tail is truncated; *truncated (when given) receives the dropped count.
  Sequence(std::vector<Symbol> symbols, int w, int M, int* truncated = nullptr);

  static Sequence from_ints(const std::vector<int>& symbols, int w, int M,
                            int* truncated = nullptr);

  int w() const { return w_; }
  int M() const { return M_; }
  long L() const { return static_cast<long>(symbols_.size()); }
  int n_blocks() const { return static_cast<int>(symbols_.size()) / w_; }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  // Symbol at position k (0-based) of block i.
  Symbol at(int block, int k) const {
    return symbols_[static_cast<std::size_t>(block) * w_ + k];
  }

  // Base-M word index of block i, word_index = sum_k (s_k - 1) * M^k.
  WordIndex block_word(int block) const { return block_words_[block]; }
  const std::vector<WordIndex>& block_words() const { return block_words_; }

 private:
  std::vector<Symbol> symbols_;
  std::vector<WordIndex> block_words_;
  int w_;
  int M_;
};

// Word codec shared by collapsed/landscape/datagen code paths.
WordIndex word_to_index(const std::vector<Symbol>& word, int M);
std::vector<Symbol> index_to_word(WordIndex idx, int w, int M);
WordIndex word_space_size(int w, int M);  // M^w, guarded against overflow

// Binary motif-instance indicators, one per block.
struct Assignment {
  std::vector<std::uint8_t> bits;

  Assignment() = default;
  explicit Assignment(int n, bool value = false)
      : bits(static_cast<std::size_t>(n), value ? 1 : 0) {}

  int size() const { return static_cast<int>(bits.size()); }
  int count() const {
    int c = 0;
    for (auto b : bits) c += b;
    return c;
  }
  bool operator==(const Assignment& other) const = default;
};

// Inference-model constants: block width w and alphabet size M are carried
// by the Sequence; this holds p0 and the Dirichlet hyperparameters.
struct ModelParams {
  double p0 = 0.0;
  std::vector<std::vector<double>> beta;  // (w+1) x M, beta[0] = background

  static ModelParams flat(int w, int M, double p0, double b = 1.0);

  int w() const { return static_cast<int>(beta.size()) - 1; }
  int M() const { return beta.empty() ? 0 : static_cast<int>(beta[0].size()); }
  double beta_row_sum(int k) const;
  void validate() const;
};

// Position-specific frequency matrix; row 0 is the background vector.
struct ThetaMatrix {
  std::vector<std::vector<double>> rows;  // (w+1) x M

  static ThetaMatrix uniform(int w, int M);

  int w() const { return static_cast<int>(rows.size()) - 1; }
  int M() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
  void validate(double tol = 1e-12) const;
};

struct CountVectors {
  std::vector<std::vector<long>> motif;  // w x M, N(A^(k))
  std::vector<long> background;          // M, N(A^c)
  std::vector<long> total;               // M, N(S)
};

}  // namespace motifmix

#endif  // MOTIFMIX_TYPES_HPP
