#include "motifmix/gibbs.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "motifmix/util.hpp"

namespace motifmix {

const char* scan_name(ScanType scan) {
  return scan == ScanType::kRandom ? "random" : "systematic";
}

std::vector<double> ChainTrace::column(int col) const {
  std::vector<double> out(n_records);
  for (long r = 0; r < n_records; ++r) out[r] = at(r, col);
  return out;
}

int ChainTrace::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return static_cast<int>(c);
  throw DimensionError("ChainTrace: no column named " + name);
}

void ChainTrace::write_csv(std::ostream& os) const {
  os << "record";
  for (const auto& c : columns) os << ',' << c;
  os << '\n';
  os.precision(17);
  for (long r = 0; r < n_records; ++r) {
    os << r;
    for (std::size_t c = 0; c < columns.size(); ++c) os << ',' << at(r, c);
    os << '\n';
  }
}

std::string ChainTrace::header_json() const {
  std::ostringstream os;
  os << "{\"w\":" << w << ",\"M\":" << M << ",\"burn_in\":" << schedule.burn_in
     << ",\"samples\":" << schedule.samples << ",\"thin\":" << schedule.thin
     << ",\"scan\":\"" << scan_name(schedule.scan) << "\",\"unit\":\""
     << (schedule.scan == ScanType::kSystematic ? "sweep" : "step")
     << "\",\"seed\":" << seed << ",\"stream\":" << stream
     << ",\"n_records\":" << n_records << ",\"columns\":[";
  for (std::size_t c = 0; c < columns.size(); ++c)
    os << (c ? "," : "") << '"' << columns[c] << '"';
  os << "]}";
  return os.str();
}

std::vector<std::string> summary_columns(int w, int M) {
  std::vector<std::string> cols;
  cols.push_back("abs_A");
  for (int k = 0; k <= w; ++k)
    for (int m = 1; m <= M; ++m)
      cols.push_back("theta_hat_" + std::to_string(k) + "_" + std::to_string(m));
  return cols;
}

GibbsSampler::GibbsSampler(const Sequence& seq, const ModelParams& params,
                           Assignment init)
    : seq_(&seq), params_(params) {
  params_.validate();
  if (params_.w() != seq.w() || params_.M() != seq.M())
    throw DimensionError("GibbsSampler: params (w,M) do not match sequence");
  if (init.size() != seq.n_blocks())
    throw DimensionError("GibbsSampler: init length != block count");
  beta_sums_.resize(params_.beta.size());
  for (std::size_t k = 0; k < params_.beta.size(); ++k)
    beta_sums_[k] = params_.beta_row_sum(static_cast<int>(k));
  prior_ratio_ = params_.p0 / (1.0 - params_.p0);
  total_counts_.assign(seq.M(), 0);
  for (Symbol s : seq.symbols()) total_counts_[s - 1]++;
  A_ = Assignment(seq.n_blocks(), false);
  bg_counts_ = total_counts_;
  motif_counts_.assign(static_cast<std::size_t>(seq.w()) * seq.M(), 0);
  ones_ = 0;
  set_assignment(init);
}

void GibbsSampler::set_assignment(const Assignment& A) {
  if (A.size() != seq_->n_blocks())
    throw DimensionError("set_assignment: length mismatch");
  for (int i = 0; i < A.size(); ++i)
    if (A.bits[i] != A_.bits[i]) toggle(i);
}

void GibbsSampler::toggle(int i) {
  const int w = seq_->w();
  const int M = seq_->M();
  if (A_.bits[i]) {
    for (int k = 0; k < w; ++k) {
      const int m = seq_->at(i, k) - 1;
      motif_counts_[k * M + m]--;
      bg_counts_[m]++;
    }
    ones_--;
    A_.bits[i] = 0;
  } else {
    for (int k = 0; k < w; ++k) {
      const int m = seq_->at(i, k) - 1;
      motif_counts_[k * M + m]++;
      bg_counts_[m]--;
    }
    ones_++;
    A_.bits[i] = 1;
  }
}

double GibbsSampler::site_prob_one(int i) const {
  const int w = seq_->w();
  const int M = seq_->M();
  const bool cur = A_.bits[i] != 0;
  const long rest_ones = ones_ - (cur ? 1 : 0);

  // Motif side: p0 * prod_k theta_check_{k,s_k}, counts excluding block i.
  double a = params_.p0;
  for (int k = 0; k < w; ++k) {
    const int m = seq_->at(i, k) - 1;
    const long nk = motif_counts_[k * M + m] - (cur ? 1 : 0);
    a *= (nk + params_.beta[k + 1][m]) / (rest_ones + beta_sums_[k + 1]);
  }

  // Background side: (1-p0) times the gamma ratio written as a product of
  // rising-factorial terms. bg1 are background counts with block i removed
  // (i.e. with A_i = 1); offs tracks repeats of a symbol within the block.
  int delta_small[16] = {0};
  int offs_small[16] = {0};
  std::vector<int> delta_big, offs_big;
  int* delta = delta_small;
  int* offs = offs_small;
  if (M > 16) {
    delta_big.assign(M, 0);
    offs_big.assign(M, 0);
    delta = delta_big.data();
    offs = offs_big.data();
  }
  if (!cur)
    for (int k = 0; k < w; ++k) delta[seq_->at(i, k) - 1]++;

  double bg1_total = beta_sums_[0] - (cur ? 0 : w);
  for (int m = 0; m < M; ++m) bg1_total += bg_counts_[m];

  double b = 1.0 - params_.p0;
  for (int k = 0; k < w; ++k) {
    const int m = seq_->at(i, k) - 1;
    const long bg1_m = bg_counts_[m] - delta[m];
    b *= (bg1_m + params_.beta[0][m] + offs[m]) / (bg1_total + k);
    offs[m]++;
  }

  const double total = a + b;
  if (total > 0.0 && std::isfinite(total)) return a / total;
  return sigmoid(site_log_odds(i));
}

double GibbsSampler::site_log_odds(int i) const {
  const int w = seq_->w();
  const int M = seq_->M();
  const bool cur = A_.bits[i] != 0;
  const long rest_ones = ones_ - (cur ? 1 : 0);

  double lo = std::log(params_.p0) - std::log1p(-params_.p0);
  for (int k = 0; k < w; ++k) {
    const int m = seq_->at(i, k) - 1;
    const long nk = motif_counts_[k * M + m] - (cur ? 1 : 0);
    lo += std::log(nk + params_.beta[k + 1][m]) -
          std::log(rest_ones + beta_sums_[k + 1]);
  }
  std::vector<long> bg1(bg_counts_.begin(), bg_counts_.end());
  if (!cur)
    for (int k = 0; k < w; ++k) bg1[seq_->at(i, k) - 1]--;
  double bg1_total = beta_sums_[0];
  for (int m = 0; m < M; ++m) bg1_total += bg1[m];
  std::vector<int> offs(M, 0);
  for (int k = 0; k < w; ++k) {
    const int m = seq_->at(i, k) - 1;
    lo -= std::log(bg1[m] + params_.beta[0][m] + offs[m]) -
          std::log(bg1_total + k);
    offs[m]++;
  }
  return lo;
}

void GibbsSampler::random_scan_step(CounterRng& rng) {
  const int n = seq_->n_blocks();
  const int i = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
  const bool hold = rng.next_unit() < 0.5;
  if (hold) return;
  const double p1 = site_prob_one(i);
  const bool next = rng.next_unit() < p1;
  if (next != (A_.bits[i] != 0)) toggle(i);
}

void GibbsSampler::systematic_sweep(CounterRng& rng) {
  const int n = seq_->n_blocks();
  for (int i = 0; i < n; ++i) {
    const double p1 = site_prob_one(i);
    const bool next = rng.next_unit() < p1;
    if (next != (A_.bits[i] != 0)) toggle(i);
  }
}

CountVectors GibbsSampler::counts() const {
  const int w = seq_->w();
  const int M = seq_->M();
  CountVectors cv;
  cv.motif.assign(w, std::vector<long>(M, 0));
  for (int k = 0; k < w; ++k)
    for (int m = 0; m < M; ++m) cv.motif[k][m] = motif_counts_[k * M + m];
  cv.background = bg_counts_;
  cv.total = total_counts_;
  return cv;
}

void GibbsSampler::write_summaries(double* out) const {
  const int w = seq_->w();
  const int M = seq_->M();
  *out++ = static_cast<double>(ones_);
  double bg_total = beta_sums_[0];
  for (int m = 0; m < M; ++m) bg_total += bg_counts_[m];
  for (int m = 0; m < M; ++m)
    *out++ = (bg_counts_[m] + params_.beta[0][m]) / bg_total;
  for (int k = 0; k < w; ++k) {
    const double den = ones_ + beta_sums_[k + 1];
    for (int m = 0; m < M; ++m)
      *out++ = (motif_counts_[k * M + m] + params_.beta[k + 1][m]) / den;
  }
}

Assignment random_scan_step(const Sequence& seq, const Assignment& A,
                            const ModelParams& params, CounterRng& rng) {
  GibbsSampler s(seq, params, A);
  s.random_scan_step(rng);
  return s.assignment();
}

Assignment systematic_sweep(const Sequence& seq, const Assignment& A,
                            const ModelParams& params, CounterRng& rng) {
  GibbsSampler s(seq, params, A);
  s.systematic_sweep(rng);
  return s.assignment();
}

ChainTrace run_chain(const Sequence& seq, const ModelParams& params,
                     const Assignment& init, const Schedule& schedule,
                     std::uint64_t seed, std::uint64_t stream) {
  if (schedule.burn_in < 0 || schedule.samples < 0 || schedule.thin < 1)
    throw DimensionError("run_chain: bad schedule");
  GibbsSampler sampler(seq, params, init);
  CounterRng rng(seed, stream);

  ChainTrace trace;
  trace.w = seq.w();
  trace.M = seq.M();
  trace.schedule = schedule;
  trace.seed = seed;
  trace.stream = stream;
  trace.columns = summary_columns(seq.w(), seq.M());
  const long n_records = schedule.samples / schedule.thin;
  trace.n_records = n_records;
  trace.data.resize(static_cast<std::size_t>(n_records) * trace.columns.size());

  auto advance = [&]() {
    if (schedule.scan == ScanType::kSystematic)
      sampler.systematic_sweep(rng);
    else
      sampler.random_scan_step(rng);
  };

  for (long t = 0; t < schedule.burn_in; ++t) advance();
  long rec = 0;
  for (long t = 0; t < schedule.samples; ++t) {
    advance();
    if ((t + 1) % schedule.thin == 0 && rec < n_records) {
      sampler.write_summaries(trace.data.data() +
                              static_cast<std::size_t>(rec) * trace.columns.size());
      if (schedule.record_assignments) trace.snapshots.push_back(sampler.assignment());
      ++rec;
    }
  }
  trace.n_records = rec;
  trace.data.resize(static_cast<std::size_t>(rec) * trace.columns.size());
  return trace;
}

}  // namespace motifmix
