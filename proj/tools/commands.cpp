#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>

#include "motifmix/collapsed.hpp"
#include "motifmix/diagnostics.hpp"
#include "motifmix/landscape.hpp"
#include "motifmix/spectral.hpp"
#include "motifmix/util.hpp"
#include "motifmix/version.hpp"

namespace motifmix::cli {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::ios_base::failure("cannot create output dir: " + dir);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write: " + path);
  return out;
}

nlohmann::json report_stub(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.master_seed;
  j["version"] = kVersion;
  return j;
}

void write_lock(const RunContext& ctx) {
  auto out = open_out(ctx.out_dir + "/config.lock.json");
  nlohmann::json lock;
  lock["config"] = ctx.config.raw;
  lock["config_hash"] = ctx.config.config_hash;
  lock["version"] = kVersion;
  out << lock.dump(2) << '\n';
}

void write_report(const RunContext& ctx, const nlohmann::json& report) {
  auto out = open_out(ctx.out_dir + "/report.json");
  out << report.dump(2) << '\n';
}

std::pair<Sequence, std::vector<int>> simulate_data(const ExperimentConfig& cfg,
                                                    std::uint64_t seed) {
  if (cfg.n_blocks < 1) throw SchemaError("n_blocks: required for simulation");
  GenerativeModel gen = cfg.build_generative_model(seed);
  return sample_sequence(gen, cfg.n_blocks, seed, 0x5e9);
}

Sequence obtain_sequence(const RunContext& ctx, const std::string& data_file,
                         std::vector<int>* labels_out = nullptr) {
  if (!data_file.empty())
    return read_sequence_file(data_file, ctx.config.w, ctx.config.M);
  auto [seq, labels] = simulate_data(ctx.config, ctx.config.master_seed);
  if (labels_out) *labels_out = std::move(labels);
  return std::move(seq);
}

}  // namespace

void write_sequence_file(const Sequence& seq, const std::string& path) {
  auto out = open_out(path);
  const int M = seq.M();
  if (M != 4 && M > 9)
    throw SchemaError("sequence file codec supports M = 4 (ACGT) or M <= 9");
  static const char* acgt = "ACGT";
  long col = 0;
  for (Symbol s : seq.symbols()) {
    out << (M == 4 ? acgt[s - 1] : static_cast<char>('0' + s));
    if (++col % 80 == 0) out << '\n';
  }
  if (col % 80 != 0) out << '\n';
}

Sequence read_sequence_file(const std::string& path, int w, int M) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open sequence file: " + path);
  std::vector<Symbol> symbols;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '>') continue;  // FASTA header
    for (char c : line) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      int v;
      const char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (M == 4 && (u == 'A' || u == 'C' || u == 'G' || u == 'T'))
        v = u == 'A' ? 1 : u == 'C' ? 2 : u == 'G' ? 3 : 4;
      else if (c >= '1' && c <= '9')
        v = c - '0';
      else
        throw SchemaError(std::string("invalid symbol '") + c +
                          "' in sequence file");
      if (v > M) throw SchemaError("symbol outside alphabet in sequence file");
      symbols.push_back(static_cast<Symbol>(v));
    }
  }
  int truncated = 0;
  Sequence seq(std::move(symbols), w, M, &truncated);
  if (truncated > 0)
    std::cerr << "warning: sequence length not divisible by w; dropped "
              << truncated << " trailing symbols\n";
  return seq;
}

int cmd_simulate(const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  std::vector<int> labels;
  auto [seq, lab] = simulate_data(ctx.config, ctx.config.master_seed);
  labels = std::move(lab);
  write_sequence_file(seq, ctx.out_dir + "/sequence.txt");
  {
    auto out = open_out(ctx.out_dir + "/truth.csv");
    out << "block,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
      out << i << ',' << labels[i] << '\n';
  }
  write_lock(ctx);
  nlohmann::json report = report_stub(ctx.config);
  report["command"] = "simulate";
  report["n_blocks"] = seq.n_blocks();
  report["L"] = seq.L();
  write_report(ctx, report);
  return 0;
}

int cmd_sample(const RunContext& ctx, const std::string& data_file) {
  ensure_dir(ctx.out_dir);
  const ExperimentConfig& cfg = ctx.config;
  Sequence seq = obtain_sequence(ctx, data_file);
  const ModelParams params = cfg.inference_params();

  nlohmann::json report = report_stub(cfg);
  report["command"] = "sample";
  report["chains"] = cfg.chains;
  auto& chain_list = report["traces"] = nlohmann::json::array();

  std::vector<ChainTrace> traces(cfg.chains);
  parallel_for(cfg.chains, ctx.workers, [&](std::size_t c) {
    CounterRng init_rng(cfg.master_seed, 0x100 + c);
    Assignment init(seq.n_blocks(), false);
    for (auto& b : init.bits) b = init_rng.next_bernoulli(params.p0);
    traces[c] = run_chain(seq, params, init, cfg.schedule, cfg.master_seed,
                          0x200 + c);
  });
  for (int c = 0; c < cfg.chains; ++c) {
    const std::string base = ctx.out_dir + "/trace_" + std::to_string(c);
    auto csv = open_out(base + ".csv");
    traces[c].write_csv(csv);
    auto meta = open_out(base + ".json");
    meta << traces[c].header_json() << '\n';
    chain_list.push_back("trace_" + std::to_string(c) + ".csv");
  }
  write_lock(ctx);
  write_report(ctx, report);
  return 0;
}

int cmd_exact_gap(const RunContext& ctx, const std::string& data_file) {
  ensure_dir(ctx.out_dir);
  const ExperimentConfig& cfg = ctx.config;
  Sequence seq = obtain_sequence(ctx, data_file);
  const ModelParams params = cfg.inference_params();
  ReversibleChain chain = build_full_chain(seq, params, cfg.max_blocks_exact);

  const double gap = spectral_gap(chain);
  nlohmann::json report = report_stub(cfg);
  report["command"] = "exact-gap";
  report["n_states"] = chain.n;
  report["gap"] = gap;
  report["lazy"] = chain.lazy;
  report["min_log_pi"] = chain.min_log_pi();
  const MixingTimeBounds bounds = mixing_time_bounds(gap, chain.min_log_pi(), 0.25);
  report["tau_bounds"] = {{"epsilon", 0.25},
                          {"lower", bounds.lower},
                          {"upper", bounds.upper}};
  if (cfg.analysis.empty() || cfg.analysis_enabled("tv-mixing")) {
    TvMixingResult tv = exact_tv_mixing_time(chain, 0.25);
    if (!tv.converged)
      throw ResourceError("TV mixing-time iteration hit its cap");
    report["tau_exact"] = tv.tau;
  }
  write_lock(ctx);
  write_report(ctx, report);
  return 0;
}

int cmd_collapsed(const RunContext& ctx, const std::string& data_file) {
  ensure_dir(ctx.out_dir);
  const ExperimentConfig& cfg = ctx.config;
  Sequence seq = obtain_sequence(ctx, data_file);
  const ModelParams params = cfg.inference_params();
  CollapsedOptions opts;
  opts.state_budget = cfg.state_budget;
  opts.matrix_budget = cfg.matrix_budget;
  CollapsedChain chain = projection_matrix(seq, params, opts);

  {
    auto out = open_out(ctx.out_dir + "/pi_bar.csv");
    write_pi_csv(chain, out);
  }
  {
    auto out = open_out(ctx.out_dir + "/tbar_coo.txt");
    write_transitions_coo(chain, out);
  }
  nlohmann::json report = report_stub(cfg);
  report["command"] = "collapsed";
  report["n_states"] = chain.n_states;
  report["n_words"] = chain.table.n_words();

  ReversibleChain bar = chain.to_reversible_chain();
  if (cfg.analysis.empty() || cfg.analysis_enabled("collapsed-gap"))
    report["gap_bar"] = spectral_gap(bar);
  if (cfg.analysis_enabled("conductance")) {
    ConductanceResult cond = conductance(bar);
    report["conductance"] = {{"phi", cond.phi}, {"exact", cond.exact}};
  }
  if (cfg.analysis_enabled("path-bound")) {
    PathBoundResult rho = path_bound_rho(bar);
    report["path_bound"] = {{"rho", rho.rho}};
  }

  // Figure-3 style slice for w=2: log pi_bar over two word counts with the
  // other coordinates fixed at zero.
  if (cfg.w == 2 && chain.table.n_words() >= 2) {
    int sa = 0, sb = 1;
    if (cfg.words && cfg.words->size() >= 2) {
      std::vector<Symbol> wa((*cfg.words)[0].begin(), (*cfg.words)[0].end());
      std::vector<Symbol> wb((*cfg.words)[1].begin(), (*cfg.words)[1].end());
      const int fa = chain.table.find(word_to_index(wa, cfg.M));
      const int fb = chain.table.find(word_to_index(wb, cfg.M));
      if (fa >= 0 && fb >= 0) {
        sa = fa;
        sb = fb;
      }
    }
    auto out = open_out(ctx.out_dir + "/pi_bar_slice.csv");
    out << "c_a,c_b,log_pi_bar\n";
    out.precision(17);
    std::vector<int> coords(chain.table.n_words(), 0);
    for (int ca = 0; ca <= chain.table.counts[sa]; ++ca)
      for (int cb = 0; cb <= chain.table.counts[sb]; ++cb) {
        coords.assign(chain.table.n_words(), 0);
        coords[sa] = ca;
        coords[sb] = cb;
        out << ca << ',' << cb << ',' << chain.log_pi[chain.encode(coords)]
            << '\n';
      }
    report["slice"] = {{"word_a", sa}, {"word_b", sb}, {"file", "pi_bar_slice.csv"}};
  }
  write_lock(ctx);
  write_report(ctx, report);
  return 0;
}

int cmd_bottleneck(const RunContext& ctx, const std::string& data_file) {
  ensure_dir(ctx.out_dir);
  const ExperimentConfig& cfg = ctx.config;
  Sequence seq = obtain_sequence(ctx, data_file);
  const ModelParams params = cfg.inference_params();
  CollapsedOptions opts;
  opts.state_budget = cfg.state_budget;
  opts.matrix_budget = cfg.matrix_budget;
  CollapsedChain chain = collapsed_posterior(seq, params, opts);
  BottleneckResult d =
      bottleneck_d(chain, cfg.bottleneck_restricted, cfg.bottleneck_top_k);

  nlohmann::json report = report_stub(cfg);
  report["command"] = "bottleneck";
  report["n_states"] = chain.n_states;
  report["log_d"] = d.log_d;
  report["d"] = std::isfinite(d.d) ? nlohmann::json(d.d) : nlohmann::json();
  report["mode"] = d.restricted
                       ? "restricted-topK (heuristic: outer min limited to the "
                         "top-K probability states)"
                       : "full";
  if (d.restricted) report["top_k"] = d.top_k;
  report["witness"] = {{"state1", chain.decode(d.state1)},
                       {"state2", chain.decode(d.state2)},
                       {"bottleneck_state", chain.decode(d.bottleneck_state)},
                       {"log_pi_bottleneck", d.log_bottleneck}};
  write_lock(ctx);
  write_report(ctx, report);
  return 0;
}

int cmd_landscape(const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  const ExperimentConfig& cfg = ctx.config;
  GenerativeModel gen = cfg.build_generative_model(cfg.master_seed);
  const double p0 = cfg.resolved_p0();

  std::vector<ThetaMatrix> starts;
  for (int j = 0; j < gen.J; ++j) {
    ThetaMatrix t;
    t.rows.push_back(gen.background);
    for (int k = 0; k < gen.w; ++k) t.rows.push_back(gen.motif_matrices[j][k]);
    starts.push_back(std::move(t));
  }
  GridConfig grid;
  grid.step = cfg.landscape_step;
  grid.margin = cfg.landscape_margin;
  MultistartConfig ms;
  ms.random_starts = cfg.landscape_random_starts;
  ms.certificate_samples = cfg.landscape_certificate_samples;
  ms.seed = cfg.master_seed ^ 0x1a2d;
  ms.workers = ctx.workers;
  ModeScan scan = find_local_maxima(gen, p0, starts, grid, ms);

  nlohmann::json report = report_stub(cfg);
  report["command"] = "landscape";
  report["separated_modes"] = scan.separated_count();
  auto& modes = report["modes"] = nlohmann::json::array();
  for (const auto& m : scan.modes) {
    nlohmann::json e;
    e["eta"] = m.eta_value;
    e["separated"] = m.separated;
    e["basin_hits"] = m.basin_hits;
    e["theta"] = m.theta.rows;
    modes.push_back(e);
  }
  auto& certs = report["certificates"] = nlohmann::json::array();
  for (const auto& c : scan.certificates)
    certs.push_back({{"mode_a", c.mode_a},
                     {"mode_b", c.mode_b},
                     {"certified", c.certified},
                     {"surface_max_eta", c.surface_max_eta},
                     {"samples", c.samples_used},
                     {"note", "sampled midpoint-hyperplane surrogate for the "
                              "boundary condition (heuristic)"}});

  if (cfg.M == 2) {
    auto out = open_out(ctx.out_dir + "/eta_slice.csv");
    const int row_b = cfg.w >= 2 ? 2 : 0;  // second motif row, else background
    write_eta_slice_csv(gen, p0, ThetaMatrix::uniform(cfg.w, 2), 1, row_b, 41,
                        cfg.landscape_margin, out);
    report["eta_slice"] = "eta_slice.csv";
  }
  write_lock(ctx);
  write_report(ctx, report);
  return 0;
}

int cmd_table1(const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  const ExperimentConfig& cfg = ctx.config;
  if (cfg.n_blocks < 1) throw SchemaError("n_blocks: required for table1");
  if (!(cfg.calib_motif_median > 0.0 && cfg.calib_background_median > 0.0))
    throw SchemaError("table1 needs generative.calibration medians");

  Table1CellConfig cell;
  cell.J = cfg.J;
  cell.w = cfg.w;
  cell.M = cfg.M;
  cell.n_blocks = cfg.n_blocks;
  cell.n_datasets = cfg.table1_datasets;
  cell.motif_freqs = cfg.p;
  cell.a0 = calibrate_dirichlet_concentration(cfg.calib_background_median, cfg.M,
                                              cfg.calib_mc_samples,
                                              cfg.master_seed ^ 0xbac);
  cell.a1 = calibrate_dirichlet_concentration(cfg.calib_motif_median, cfg.M,
                                              cfg.calib_mc_samples,
                                              cfg.master_seed ^ 0x301f);
  cell.p0 = cfg.p0;
  cell.burn_in = cfg.schedule.burn_in;
  cell.samples = cfg.schedule.samples;
  cell.thin = cfg.schedule.thin;
  cell.seed = cfg.master_seed;
  cell.workers = ctx.workers;
  ExperimentReport rep = run_table1_cell(cell);

  {
    auto out = open_out(ctx.out_dir + "/report.json");
    out << rep.to_json(cfg.config_hash, cfg.master_seed) << '\n';
  }
  {
    auto out = open_out(ctx.out_dir + "/cell.csv");
    out << "J,w,n_blocks,n_datasets,flagged_percent\n" << rep.csv_row() << '\n';
  }
  write_lock(ctx);
  std::cout << "flagged: " << rep.flagged_percent << "%\n";
  return 0;
}

int cmd_calibrate(const RunContext& ctx) {
  ensure_dir(ctx.out_dir);
  const ExperimentConfig& cfg = ctx.config;
  nlohmann::json report = report_stub(cfg);
  report["command"] = "calibrate";
  if (cfg.calib_motif_median > 0.0)
    report["a1"] = calibrate_dirichlet_concentration(
        cfg.calib_motif_median, cfg.M, cfg.calib_mc_samples,
        cfg.master_seed ^ 0x301f);
  if (cfg.calib_background_median > 0.0)
    report["a0"] = calibrate_dirichlet_concentration(
        cfg.calib_background_median, cfg.M, cfg.calib_mc_samples,
        cfg.master_seed ^ 0xbac);
  if (!report.contains("a0") && !report.contains("a1"))
    throw SchemaError("calibrate: generative.calibration must set a target");
  write_lock(ctx);
  write_report(ctx, report);
  std::cout << report.dump(2) << '\n';
  return 0;
}

}  // namespace motifmix::cli
