#ifndef MOTIFMIX_TOOLS_COMMANDS_HPP
#define MOTIFMIX_TOOLS_COMMANDS_HPP

#include <string>
#include <vector>

#include "config.hpp"

namespace motifmix::cli {

struct RunContext {
  ExperimentConfig config;
  std::string out_dir;
  int workers = 0;
};

// Sequence file codec: ACGT for M=4 (A=1, C=2, G=3, T=4), digit characters
// otherwise (M <= 9). Reading skips FASTA headers and accepts lowercase.
void write_sequence_file(const Sequence& seq, const std::string& path);
Sequence read_sequence_file(const std::string& path, int w, int M);

int cmd_simulate(const RunContext& ctx);
int cmd_sample(const RunContext& ctx, const std::string& data_file = "");
int cmd_exact_gap(const RunContext& ctx, const std::string& data_file = "");
int cmd_collapsed(const RunContext& ctx, const std::string& data_file = "");
int cmd_bottleneck(const RunContext& ctx, const std::string& data_file = "");
int cmd_landscape(const RunContext& ctx);
int cmd_table1(const RunContext& ctx);
int cmd_calibrate(const RunContext& ctx);

}  // namespace motifmix::cli

#endif  // MOTIFMIX_TOOLS_COMMANDS_HPP
