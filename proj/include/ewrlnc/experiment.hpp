#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewrlnc/core.hpp"
#include "ewrlnc/mdp.hpp"
#include "ewrlnc/optimize.hpp"
#include "ewrlnc/packetize.hpp"

namespace ewrlnc {

// Raised for malformed configurations and input files; the CLI maps it
// to its config-error exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TxScheme { FeedbackFreeRlnc, FullFeedbackMdp, Uncoded };

// One batch run: which experiment, over which GOPs, channel and budget
// grid, and where the outputs go. Defaults follow the common setup:
// 1500-byte packets with 100-byte headers, 100 trials, a 51-point
// lambda grid, seed 1.
struct ExperimentConfig {
  std::string command;  // design | simulate | pareto | optlayer
  TxScheme scheme = TxScheme::FeedbackFreeRlnc;

  // GOP source: either explicit layouts or a trace file. For optlayer,
  // multiple --K values form the candidate set of a single GOP;
  // otherwise each explicit layout is its own GOP.
  std::vector<Eigen::VectorXi> explicit_k;
  std::string trace_path;
  bool opt_layers = false;
  int layers = 1;  // packetization depth for trace input, 1..4
  WeightKind weights = WeightKind::Frame;

  Eigen::VectorXd pes;
  std::uint64_t seed = 1;

  int nt_min = 0;
  int nt_max = -1;  // inclusive; -1 = copy nt_min
  int nt_step = 1;

  std::string agg_kind = "mean";  // mean | weights | jain | weightedsum
  Eigen::VectorXd agg_weights;
  double lambda = 1.0;
  int lambda_count = 51;

  int trials = 100;
  int packet_bytes = kDefaultPacketBytes;
  int header_bytes = kDefaultHeaderBytes;
  std::int64_t mdp_cap = kDefaultMdpCap;

  std::string out_csv;
  std::string out_json;
  std::string dump_mdp;  // MDP table dump path stem, empty = no dump
};

// Checks every field against the module preconditions it feeds; throws
// ConfigError naming the field and the violated constraint.
void validate_config(const ExperimentConfig& config);

// Stable 64-bit FNV-1a digest of the canonical key=value rendering of
// the configuration (output paths excluded), as 16 hex digits. Rows
// carry it so result files are traceable to their configuration.
std::string config_hash(const ExperimentConfig& config);

// Parses a GOP trace: one GOP per line as 8 whitespace-separated frame
// byte sizes; '#' starts a comment. Throws ConfigError with the line
// number on malformed input.
std::vector<GopFrameSizes> parse_gop_trace(const std::string& path, int packet_bytes,
                                           int header_bytes);

// One output row: the sort key fields plus the preformatted CSV cells.
struct ResultRow {
  int gop = 0;
  int user = 0;
  int nt = 0;
  double lambda = -1.0;  // -1 = not applicable
  std::vector<std::string> cells;
};

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<ResultRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;  // JSON mirror extras
};

// Experiment runners; rows come back sorted by (gop, user, Nt, lambda).
ResultTable run_design(const ExperimentConfig& config);
ResultTable run_simulate(const ExperimentConfig& config);
ResultTable run_pareto(const ExperimentConfig& config);
ResultTable run_optlayer(const ExperimentConfig& config);

// Dispatches on config.command.
ResultTable run_experiment(const ExperimentConfig& config);

// Writes the table as CSV (fixed column set, '\n' line ends) or as a
// JSON mirror carrying the full configuration and metadata.
void write_csv(const ResultTable& table, const std::string& path);
void write_json(const ResultTable& table, const ExperimentConfig& config,
                const std::string& path);

// Runs the experiment and writes the configured outputs.
ResultTable run_and_write(const ExperimentConfig& config);

namespace detail {
std::string format_double(double value);
std::string format_alloc(const Eigen::VectorXi& values);  // "a;b;c"
}  // namespace detail

}  // namespace ewrlnc
