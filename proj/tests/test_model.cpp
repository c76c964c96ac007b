#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "motifmix/model.hpp"
#include "motifmix/rng.hpp"
#include "motifmix/util.hpp"
#include "support/test_support.hpp"

using namespace motifmix;
using namespace testsupport;

namespace {

Sequence repeat_block(const std::vector<int>& block, int times, int M) {
  std::vector<int> symbols;
  for (int t = 0; t < times; ++t)
    symbols.insert(symbols.end(), block.begin(), block.end());
  return Sequence::from_ints(symbols, static_cast<int>(block.size()), M);
}

}  // namespace

TEST_CASE("count_vectors: no motif instances") {
  Sequence seq = repeat_block({1, 4, 2, 2, 3}, 4, 4);
  Assignment A(4, false);
  CountVectors cv = count_vectors(seq, A);
  for (int k = 0; k < 5; ++k)
    for (int m = 0; m < 4; ++m) CHECK(cv.motif[k][m] == 0);
  CHECK(cv.background == cv.total);
}

TEST_CASE("count_vectors: the (1,4,2,2,3) block lands in the right cells") {
  Sequence seq = repeat_block({1, 4, 2, 2, 3}, 3, 4);
  Assignment A(3, false);
  A.bits[1] = 1;
  CountVectors cv = count_vectors(seq, A);
  CHECK(cv.motif[0][0] == 1);  // position 1 symbol 1
  CHECK(cv.motif[1][3] == 1);  // position 2 symbol 4
  CHECK(cv.motif[2][1] == 1);  // position 3 symbol 2
  CHECK(cv.motif[3][1] == 1);  // position 4 symbol 2
  CHECK(cv.motif[4][2] == 1);  // position 5 symbol 3
  long total_motif = 0;
  for (int k = 0; k < 5; ++k)
    for (int m = 0; m < 4; ++m) total_motif += cv.motif[k][m];
  CHECK(total_motif == 5);
}

TEST_CASE("count_vectors: random instances match a per-position tally") {
  CounterRng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    auto [seq, params] = random_instance(rng, 12, 2, 2);
    Assignment A(seq.n_blocks(), false);
    for (auto& b : A.bits) b = rng.next_bernoulli(0.5);
    CountVectors got = count_vectors(seq, A);
    CountVectors want = naive_count_vectors(seq, A);
    CHECK(got.motif == want.motif);
    CHECK(got.background == want.background);
    CHECK(got.total == want.total);
    // invariants
    for (int k = 0; k < seq.w(); ++k) {
      long row = 0;
      for (long v : got.motif[k]) row += v;
      CHECK(row == A.count());
    }
    long total = 0;
    for (int m = 0; m < seq.M(); ++m) {
      CHECK(got.background[m] >= 0);
      total += got.total[m];
    }
    CHECK(total == seq.L());
  }
}

TEST_CASE("count_vectors: length mismatch is a dimension error") {
  Sequence seq = repeat_block({1, 2}, 3, 2);
  CHECK_THROWS_AS(count_vectors(seq, Assignment(5, false)), DimensionError);
}

TEST_CASE("log_likelihood_given_theta: uniform background") {
  Sequence seq = repeat_block({1, 2, 1, 2}, 5, 2);
  Assignment A(5, false);
  ThetaMatrix theta = ThetaMatrix::uniform(4, 2);
  CHECK(log_likelihood_given_theta(seq, A, theta) ==
        doctest::Approx(-seq.L() * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("log_likelihood_given_theta: deterministic motif has probability 1") {
  Sequence seq = repeat_block({1, 4, 2, 2, 3}, 1, 4);
  Assignment A(1, true);
  ThetaMatrix theta = ThetaMatrix::uniform(5, 4);
  const std::vector<int> word{1, 4, 2, 2, 3};
  for (int k = 0; k < 5; ++k) {
    theta.rows[k + 1].assign(4, 0.0);
    theta.rows[k + 1][word[k] - 1] = 1.0;
  }
  CHECK(log_likelihood_given_theta(seq, A, theta) == doctest::Approx(0.0));
  // flipping one motif column to miss the data gives -inf
  theta.rows[1] = {0.0, 1.0, 0.0, 0.0};
  CHECK(log_likelihood_given_theta(seq, A, theta) == -kPosInf);
}

TEST_CASE("log_likelihood_given_theta: matches position-by-position oracle") {
  CounterRng rng(12);
  for (int rep = 0; rep < 30; ++rep) {
    auto [seq, params] = random_instance(rng, 8, 2, 3);
    Assignment A(seq.n_blocks(), false);
    for (auto& b : A.bits) b = rng.next_bernoulli(0.5);
    ThetaMatrix theta;
    theta.rows.resize(seq.w() + 1);
    for (auto& row : theta.rows) row = rng.next_dirichlet_sym(1.0, seq.M());
    CHECK(log_likelihood_given_theta(seq, A, theta) ==
          doctest::Approx(naive_log_likelihood(seq, A, theta)).epsilon(1e-10));
  }
}

TEST_CASE("log_posterior_unnorm: equal on states with equal collapsed counts") {
  // two blocks with identical words; swapping which one is the motif
  // instance leaves C(A) unchanged
  Sequence seq = repeat_block({1, 2, 2}, 4, 2);
  ModelParams params = ModelParams::flat(3, 2, 0.3, 1.5);
  Assignment A1(4, false), A2(4, false);
  A1.bits[0] = 1;
  A2.bits[3] = 1;
  CHECK(std::abs(log_posterior_unnorm(seq, A1, params) -
                 log_posterior_unnorm(seq, A2, params)) < 1e-12);
}

TEST_CASE("log_posterior_unnorm: full enumeration normalizes to 1") {
  CounterRng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    auto [seq, params] = random_instance(rng, 10, 2, 3);
    const auto lp = enumerate_log_posterior(seq, params);
    double total = 0.0;
    for (double v : lp) total += std::exp(v);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("log_posterior_unnorm: exchangeability of identical blocks") {
  // w=1, M=2, uniform beta, constant sequence: pi(A) depends on |A| only
  Sequence seq = repeat_block({1}, 8, 2);
  ModelParams params = ModelParams::flat(1, 2, 0.4, 1.0);
  std::map<int, double> by_count;
  for (long mask = 0; mask < 256; ++mask) {
    Assignment A = assignment_from_mask(mask, 8);
    const double lp = log_posterior_unnorm(seq, A, params);
    auto [it, inserted] = by_count.try_emplace(A.count(), lp);
    if (!inserted) CHECK(lp == doctest::Approx(it->second).epsilon(1e-12));
  }
}

TEST_CASE("marginal_block_density: uniform mixture and degenerate mixture") {
  ThetaMatrix theta = ThetaMatrix::uniform(3, 4);
  const double u = marginal_block_density({1, 3, 2}, theta, 0.37);
  CHECK(u == doctest::Approx(std::pow(4.0, -3)).epsilon(1e-12));

  ThetaMatrix point = ThetaMatrix::uniform(2, 2);
  point.rows[1] = {1.0, 0.0};
  point.rows[2] = {0.0, 1.0};
  CHECK(marginal_block_density({1, 2}, point, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("marginal_block_density: sums to 1 over the word space") {
  CounterRng rng(14);
  for (int rep = 0; rep < 10; ++rep) {
    const int w = 1 + static_cast<int>(rng.next_below(4));
    const int M = 2 + static_cast<int>(rng.next_below(3));
    ThetaMatrix theta;
    theta.rows.resize(w + 1);
    for (auto& row : theta.rows) row = rng.next_dirichlet_sym(0.7, M);
    const double p0 = rng.next_unit();
    double total = 0.0;
    std::vector<Symbol> word(w, 1);
    for (WordIndex idx = 0; idx < word_space_size(w, M); ++idx) {
      total += marginal_block_density(index_to_word(idx, w, M), theta, p0);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("conditional_odds: agrees with the two-evaluation posterior ratio") {
  CounterRng rng(15);
  for (int rep = 0; rep < 100; ++rep) {
    auto [seq, params] = random_instance(rng, 12, 2, 3);
    Assignment A(seq.n_blocks(), false);
    for (auto& b : A.bits) b = rng.next_bernoulli(0.5);
    const int i = static_cast<int>(rng.next_below(seq.n_blocks()));
    Assignment a1 = A, a0 = A;
    a1.bits[i] = 1;
    a0.bits[i] = 0;
    const double want = log_posterior_unnorm(seq, a1, params) -
                        log_posterior_unnorm(seq, a0, params);
    const double got = conditional_log_odds(seq, A, i, params);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("conditional_odds: prior-odds factor scales with p0") {
  CounterRng rng(16);
  auto [seq, params] = random_instance(rng, 8, 2, 2);
  Assignment A(seq.n_blocks(), false);
  ModelParams p_a = params, p_b = params;
  p_a.p0 = 0.2;
  p_b.p0 = 0.6;
  for (int i = 0; i < seq.n_blocks(); ++i) {
    const double lo_a = conditional_log_odds(seq, A, i, p_a);
    const double lo_b = conditional_log_odds(seq, A, i, p_b);
    const double want = std::log(0.6 / 0.4) - std::log(0.2 / 0.8);
    CHECK(lo_b - lo_a == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("conditional_odds: out-of-range index throws") {
  Sequence seq = repeat_block({1, 2}, 3, 2);
  ModelParams params = ModelParams::flat(2, 2, 0.5, 1.0);
  Assignment A(3, false);
  CHECK_THROWS_AS(conditional_log_odds(seq, A, 3, params), DimensionError);
  CHECK_THROWS_AS(conditional_log_odds(seq, A, -1, params), DimensionError);
}

TEST_CASE("conditional update probabilities respect the closed-form bounds") {
  CounterRng rng(17);
  for (int rep = 0; rep < 40; ++rep) {
    auto [seq, params] = random_instance(rng, 10, 2, 3);
    Assignment A(seq.n_blocks(), false);
    for (auto& b : A.bits) b = rng.next_bernoulli(0.5);
    for (int i = 0; i < seq.n_blocks(); ++i) {
      const double p1 = sigmoid(conditional_log_odds(seq, A, i, params));
      CHECK(p1 >= site_prob_one_lower_bound(seq, i, params));
      CHECK(1.0 - p1 >= site_prob_zero_lower_bound(seq, i, params));
    }
  }
}

TEST_CASE("posterior_mean_estimates: prior mean, normalization, hand check") {
  Sequence seq = repeat_block({1, 2, 2, 1}, 3, 2);
  ModelParams params = ModelParams::flat(4, 2, 0.3, 1.0);
  Assignment zero(3, false);
  ThetaMatrix prior_mean = posterior_mean_estimates(seq, zero, params);
  for (int k = 1; k <= 4; ++k)
    for (int m = 0; m < 2; ++m)
      CHECK(prior_mean.rows[k][m] == doctest::Approx(0.5).epsilon(1e-12));

  CounterRng rng(18);
  for (int rep = 0; rep < 20; ++rep) {
    auto [s2, p2] = random_instance(rng, 9, 2, 3);
    Assignment A(s2.n_blocks(), false);
    for (auto& b : A.bits) b = rng.next_bernoulli(0.5);
    ThetaMatrix t = posterior_mean_estimates(s2, A, p2);
    for (const auto& row : t.rows) {
      double sum = 0.0;
      for (double v : row) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  // single block marked: counts are exactly the block symbols
  Sequence one = repeat_block({1, 2}, 1, 2);
  ModelParams params1 = ModelParams::flat(2, 2, 0.5, 2.0);
  Assignment A1(1, true);
  ThetaMatrix t = posterior_mean_estimates(one, A1, params1);
  CHECK(t.rows[1][0] == doctest::Approx((1.0 + 2.0) / (1.0 + 4.0)));
  CHECK(t.rows[2][1] == doctest::Approx((1.0 + 2.0) / (1.0 + 4.0)));
  CHECK(t.rows[0][0] == doctest::Approx(2.0 / 4.0));  // empty background
}

TEST_CASE("sequence: tail not divisible by w is truncated with a report") {
  int dropped = 0;
  Sequence seq = Sequence::from_ints({1, 2, 1, 2, 1}, 2, 2, &dropped);
  CHECK(dropped == 1);
  CHECK(seq.n_blocks() == 2);
  CHECK(seq.L() == 4);
}

TEST_CASE("model params: p0 must be interior") {
  CHECK_THROWS_AS(ModelParams::flat(2, 2, 0.0, 1.0), DimensionError);
  CHECK_THROWS_AS(ModelParams::flat(2, 2, 1.0, 1.0), DimensionError);
}
