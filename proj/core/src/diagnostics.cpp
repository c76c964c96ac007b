#include "motifmix/diagnostics.hpp"

#include <cmath>
#include <memory>
#include <sstream>

#include <nlohmann/json.hpp>

#include "motifmix/datagen.hpp"
#include "motifmix/util.hpp"

namespace motifmix {

namespace {

constexpr double kVarianceFloor = 1e-300;

std::pair<double, double> mean_and_var(const double* x, long n) {
  double mean = 0.0;
  for (long i = 0; i < n; ++i) mean += x[i];
  mean /= n;
  double m2 = 0.0;
  for (long i = 0; i < n; ++i) {
    const double d = x[i] - mean;
    m2 += d * d;
  }
  return {mean, n > 1 ? m2 / (n - 1) : 0.0};
}

}  // namespace

double gelman_rubin_from_moments(const std::vector<double>& means,
                                 const std::vector<double>& variances, long n) {
  const int m = static_cast<int>(means.size());
  if (m < 2 || variances.size() != means.size())
    throw DimensionError("gelman_rubin: need >= 2 chains");
  if (n < 10) throw DimensionError("gelman_rubin: need >= 10 records per chain");
  double w = 0.0, grand = 0.0;
  for (int j = 0; j < m; ++j) {
    w += variances[j];
    grand += means[j];
  }
  w /= m;
  grand /= m;
  double b_over_n = 0.0;
  for (int j = 0; j < m; ++j) {
    const double d = means[j] - grand;
    b_over_n += d * d;
  }
  b_over_n /= (m - 1);
  if (w <= kVarianceFloor) return b_over_n <= kVarianceFloor ? 1.0 : kPosInf;
  const double var_plus = (static_cast<double>(n - 1) / n) * w + b_over_n;
  return std::sqrt(var_plus / w);
}

double gelman_rubin(const std::vector<std::vector<double>>& chains) {
  if (chains.size() < 2) throw DimensionError("gelman_rubin: need >= 2 chains");
  const std::size_t n = chains[0].size();
  for (const auto& c : chains)
    if (c.size() != n) throw DimensionError("gelman_rubin: unequal chain lengths");
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    auto [mu, var] = mean_and_var(c.data(), static_cast<long>(n));
    means.push_back(mu);
    vars.push_back(var);
  }
  return gelman_rubin_from_moments(means, vars, static_cast<long>(n));
}

double geweke_z(const std::vector<double>& series, double first, double last,
                int batches) {
  const long n = static_cast<long>(series.size());
  const long na = std::max<long>(2, static_cast<long>(n * first));
  const long nb = std::max<long>(2, static_cast<long>(n * last));
  if (na + nb > n) throw DimensionError("geweke_z: segments overlap");
  auto batch_se = [&](const double* x, long len) {
    const int nb_batches = std::min<long>(batches, len / 2);
    const long per = len / nb_batches;
    std::vector<double> bm(nb_batches);
    for (int b = 0; b < nb_batches; ++b) {
      double s = 0.0;
      for (long i = 0; i < per; ++i) s += x[b * per + i];
      bm[b] = s / per;
    }
    auto [mu, var] = mean_and_var(bm.data(), nb_batches);
    (void)mu;
    return std::sqrt(var / nb_batches);
  };
  auto [ma, va] = mean_and_var(series.data(), na);
  auto [mb, vb] = mean_and_var(series.data() + (n - nb), nb);
  (void)va;
  (void)vb;
  const double sea = batch_se(series.data(), na);
  const double seb = batch_se(series.data() + (n - nb), nb);
  const double denom = std::sqrt(sea * sea + seb * seb);
  if (denom <= kVarianceFloor) return ma == mb ? 0.0 : kPosInf;
  return (ma - mb) / denom;
}

namespace {

// Streaming per-summary Welford moments for one chain.
struct ChainMoments {
  long n = 0;
  std::vector<double> mean, m2;
  std::vector<double> abs_a_series;  // kept only when geweke is requested

  void init(int n_summaries) {
    mean.assign(n_summaries, 0.0);
    m2.assign(n_summaries, 0.0);
  }
  void add(const double* x) {
    ++n;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / n;
      m2[i] += d * (x[i] - mean[i]);
    }
  }
  double variance(int i) const { return n > 1 ? m2[i] / (n - 1) : 0.0; }
};

}  // namespace

ExperimentReport run_table1_cell(const Table1CellConfig& config_in) {
  Table1CellConfig config = config_in;
  if (config.J < 1) throw DimensionError("run_table1_cell: J must be >= 1");
  if (config.motif_freqs.empty())
    config.motif_freqs.assign(config.J, 0.005);
  if (static_cast<int>(config.motif_freqs.size()) != config.J)
    throw DimensionError("run_table1_cell: motif_freqs size != J");
  if (!(config.a0 > 0.0 && config.a1 > 0.0))
    throw DimensionError("run_table1_cell: calibrated a0/a1 required");
  double p0 = config.p0;
  if (p0 < 0.0) {
    p0 = 0.0;
    for (double p : config.motif_freqs) p0 += p;
  }
  config.p0 = p0;
  const ModelParams params =
      ModelParams::flat(config.w, config.M, p0, config.beta);
  const int n_chains = 5;
  const int n_summaries = GibbsSampler::summary_count(config.w, config.M);
  const long n_records = config.samples / config.thin;

  ExperimentReport report;
  report.config = config;
  report.summary_names = summary_columns(config.w, config.M);
  report.datasets.resize(config.n_datasets);

  struct DatasetInput {
    Sequence seq;
    std::vector<int> labels;
  };
  std::vector<std::unique_ptr<DatasetInput>> inputs(config.n_datasets);

  parallel_for(config.n_datasets, config.workers, [&](std::size_t d) {
    CounterRng model_rng(config.seed, (static_cast<std::uint64_t>(d) << 8) | 0);
    GenerativeModel gen =
        sample_study_model(config.J, config.w, config.M, config.motif_freqs,
                           config.a0, config.a1, model_rng);
    CounterRng data_rng(config.seed, (static_cast<std::uint64_t>(d) << 8) | 1);
    auto [seq, labels] = sample_sequence(gen, config.n_blocks, data_rng);
    inputs[d] = std::make_unique<DatasetInput>(
        DatasetInput{std::move(seq), std::move(labels)});
  });

  std::vector<std::vector<ChainMoments>> moments(
      config.n_datasets, std::vector<ChainMoments>(n_chains));

  parallel_for(static_cast<std::size_t>(config.n_datasets) * n_chains,
               config.workers, [&](std::size_t task) {
    const int d = static_cast<int>(task / n_chains);
    const int c = static_cast<int>(task % n_chains);
    const DatasetInput& input = *inputs[d];

    Assignment init(config.n_blocks, false);
    if (c == 0) {
      for (int i = 0; i < config.n_blocks; ++i)
        init.bits[i] = input.labels[i] == 1;
    } else if (c == 1 && config.J >= 2) {
      for (int i = 0; i < config.n_blocks; ++i)
        init.bits[i] = input.labels[i] == 2;
    } else {
      CounterRng init_rng(config.seed,
                          (static_cast<std::uint64_t>(d) << 8) | (8 + c));
      for (int i = 0; i < config.n_blocks; ++i)
        init.bits[i] = init_rng.next_bernoulli(config.p0);
    }

    GibbsSampler sampler(input.seq, params, init);
    CounterRng rng(config.seed, (static_cast<std::uint64_t>(d) << 8) | (16 + c));
    ChainMoments& mom = moments[d][c];
    mom.init(n_summaries);
    if (config.geweke) mom.abs_a_series.reserve(n_records);

    std::vector<double> row(n_summaries);
    for (long t = 0; t < config.burn_in; ++t) sampler.systematic_sweep(rng);
    for (long t = 0; t < config.samples; ++t) {
      sampler.systematic_sweep(rng);
      if ((t + 1) % config.thin == 0) {
        sampler.write_summaries(row.data());
        mom.add(row.data());
        if (config.geweke) mom.abs_a_series.push_back(row[0]);
      }
    }
  });

  int flagged = 0;
  for (int d = 0; d < config.n_datasets; ++d) {
    DatasetDiagnostics& diag = report.datasets[d];
    diag.r_hat.resize(n_summaries);
    double worst = 0.0;
    for (int i = 0; i < n_summaries; ++i) {
      std::vector<double> means(n_chains), vars(n_chains);
      for (int c = 0; c < n_chains; ++c) {
        means[c] = moments[d][c].mean[i];
        vars[c] = moments[d][c].variance(i);
      }
      diag.r_hat[i] = gelman_rubin_from_moments(means, vars, moments[d][0].n);
      worst = std::max(worst, diag.r_hat[i]);
    }
    diag.max_r_hat = worst;
    diag.flagged = worst > config.flag_threshold;
    flagged += diag.flagged;
    if (config.geweke)
      for (int c = 0; c < n_chains; ++c)
        diag.geweke_z.push_back(geweke_z(moments[d][c].abs_a_series));
  }
  report.flagged_percent = 100.0 * flagged / config.n_datasets;
  return report;
}

std::string ExperimentReport::to_json(const std::string& config_hash,
                                      std::uint64_t master_seed) const {
  nlohmann::json j;
  j["cell"] = {{"J", config.J},
               {"w", config.w},
               {"M", config.M},
               {"n_blocks", config.n_blocks},
               {"n_datasets", config.n_datasets},
               {"motif_freqs", config.motif_freqs},
               {"a0", config.a0},
               {"a1", config.a1},
               {"p0", config.p0},
               {"beta", config.beta},
               {"burn_in", config.burn_in},
               {"samples", config.samples},
               {"thin", config.thin},
               {"flag_threshold", config.flag_threshold},
               {"seed", config.seed},
               {"scan", "systematic"},
               {"r_hat_variant", "plain PSRF, no df correction, no split-half"}};
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  if (master_seed) j["master_seed"] = master_seed;
  j["summary_names"] = summary_names;
  j["flagged_percent"] = flagged_percent;
  auto& ds = j["datasets"] = nlohmann::json::array();
  for (const auto& d : datasets) {
    nlohmann::json e;
    e["max_r_hat"] = std::isfinite(d.max_r_hat) ? d.max_r_hat : 1e308;
    e["flagged"] = d.flagged;
    nlohmann::json rh = nlohmann::json::array();
    for (double r : d.r_hat) rh.push_back(std::isfinite(r) ? r : 1e308);
    e["r_hat"] = rh;
    if (!d.geweke_z.empty()) e["geweke_z"] = d.geweke_z;
    ds.push_back(e);
  }
  return j.dump(2);
}

std::string ExperimentReport::csv_row() const {
  std::ostringstream os;
  os << config.J << ',' << config.w << ',' << config.n_blocks << ','
     << config.n_datasets << ',' << flagged_percent;
  return os.str();
}

}  // namespace motifmix
