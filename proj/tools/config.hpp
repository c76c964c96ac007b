#ifndef MOTIFMIX_TOOLS_CONFIG_HPP
#define MOTIFMIX_TOOLS_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "motifmix/datagen.hpp"
#include "motifmix/gibbs.hpp"
#include "motifmix/types.hpp"

namespace motifmix::cli {

// Schema-validated experiment configuration. Unknown keys anywhere in the
// document are rejected.
struct ExperimentConfig {
  // generative
  int J = 0;
  int w = 0;
  int M = 0;
  std::vector<double> p;  // motif frequencies
  std::optional<std::vector<double>> background;
  std::optional<std::vector<std::vector<std::vector<double>>>> motifs;
  std::optional<std::vector<std::vector<int>>> words;  // deterministic motifs
  double calib_motif_median = 0.0;       // 0 = absent
  double calib_background_median = 0.0;  // 0 = absent
  int calib_mc_samples = 100000;

  // inference
  double p0 = -1.0;  // < 0: default to sum of p
  std::vector<std::vector<double>> beta;  // resolved to (w+1) x M

  // sampler
  Schedule schedule;
  int chains = 1;

  // analysis selection
  std::vector<std::string> analysis;
  bool analysis_enabled(const std::string& name) const;

  // experiment sizes
  int n_blocks = 0;
  int table1_datasets = 10;

  // landscape options
  double landscape_step = 0.02;
  double landscape_margin = 1e-4;
  int landscape_random_starts = 16;
  int landscape_certificate_samples = 1000;

  // bottleneck options
  bool bottleneck_restricted = false;
  int bottleneck_top_k = 32;
  std::size_t state_budget = 80'000'000;
  std::size_t matrix_budget = 262'144;

  // full-chain guards
  int max_blocks_exact = 14;

  std::uint64_t master_seed = 0;
  std::string output_dir;

  nlohmann::json raw;       // as parsed (for the lock file)
  std::string config_hash;  // fnv1a64 hex of the canonical dump

  double resolved_p0() const;
  ModelParams inference_params() const;

  // Generative model per the resolution order: explicit matrices, then
  // deterministic words, then Dirichlet calibration draws.
  GenerativeModel build_generative_model(std::uint64_t seed,
                                         double* a0_out = nullptr,
                                         double* a1_out = nullptr) const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config_file(const std::string& path);
std::string canonical_hash(const nlohmann::json& doc);

// Exit-code mapping shared by the CLI: 0 ok, 2 schema, 3 resource,
// 4 numeric, 5 io, 1 anything else.
int exit_code_for_current_exception();

}  // namespace motifmix::cli

#endif  // MOTIFMIX_TOOLS_CONFIG_HPP
