// Batch front-end for designing and evaluating layered RLNC broadcast
// policies. See README.md for the file formats and examples.

#include <CLI11.hpp>

#include <climits>
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "ewrlnc/experiment.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitResourceError = 3;

Eigen::VectorXd parse_double_list(const std::string& text, const std::string& field) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      values.push_back(std::stod(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ewrlnc::ConfigError(field + ": bad number '" + token + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Eigen::VectorXi parse_int_list(const std::string& text, const std::string& field) {
  std::vector<int> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string token =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      values.push_back(std::stoi(token, &used));
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw ewrlnc::ConfigError(field + ": bad integer '" + token + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return Eigen::Map<const Eigen::VectorXi>(values.data(), static_cast<Eigen::Index>(values.size()));
}

struct RawOptions {
  static constexpr int kNtUnset = INT_MIN;

  std::vector<std::string> k_lists;
  std::string pe_list = "0.1";
  std::string agg_weights;
  std::string layers = "1";
  std::string weights = "frame";
  std::string scheme = "rlnc";
  int nt = kNtUnset;
};

void add_common_options(CLI::App* sub, RawOptions& raw, ewrlnc::ExperimentConfig& cfg) {
  sub->add_option("--K", raw.k_lists,
                  "Explicit layout as comma-separated packets per layer (repeatable)");
  sub->add_option("--trace", cfg.trace_path, "GOP trace file: 8 frame byte sizes per line");
  sub->add_option("--layers", raw.layers, "Layer count 1..4 for trace packetization, or 'opt'");
  sub->add_option("--weights", raw.weights, "Importance weights: frame | throughput");
  sub->add_option("--scheme", raw.scheme, "Transmission scheme: rlnc | mdp | uncoded");
  sub->add_option("--pe", raw.pe_list, "Per-user packet error rates, comma separated");
  sub->add_option("--seed", cfg.seed, "Root seed of the erasure process");
  sub->add_option("--nt", raw.nt, "Transmission budget per GOP");
  sub->add_option("--nt-min", cfg.nt_min, "Budget sweep start");
  sub->add_option("--nt-max", cfg.nt_max, "Budget sweep end (inclusive)");
  sub->add_option("--nt-step", cfg.nt_step, "Budget sweep step");
  sub->add_option("--agg", cfg.agg_kind, "Aggregate: mean | weights | jain | weightedsum");
  sub->add_option("--agg-weights", raw.agg_weights, "Per-user weights for --agg weights");
  sub->add_option("--lambda", cfg.lambda, "Mean/fairness mix for --agg weightedsum");
  sub->add_option("--lambda-count", cfg.lambda_count, "Points in the pareto lambda grid");
  sub->add_option("--trials", cfg.trials, "Monte-Carlo repetitions");
  sub->add_option("--packet-bytes", cfg.packet_bytes, "Packet length in bytes");
  sub->add_option("--header-bytes", cfg.header_bytes, "Header bytes inside each packet");
  sub->add_option("--mdp-cap", cfg.mdp_cap, "Max MDP state-stage table entries");
  sub->add_option("--dump-mdp", cfg.dump_mdp, "Write MDP value/policy tables to this path stem");
  sub->add_option("--out", cfg.out_csv, "Output CSV path")->required();
  sub->add_option("--json", cfg.out_json, "Optional JSON mirror path");
}

void finish_config(const RawOptions& raw, ewrlnc::ExperimentConfig& cfg) {
  for (const auto& k : raw.k_lists) cfg.explicit_k.push_back(parse_int_list(k, "K"));
  cfg.pes = parse_double_list(raw.pe_list, "pe");
  if (!raw.agg_weights.empty()) cfg.agg_weights = parse_double_list(raw.agg_weights, "agg-weights");
  if (raw.layers == "opt") {
    cfg.opt_layers = true;
  } else {
    try {
      cfg.layers = std::stoi(raw.layers);
    } catch (const std::exception&) {
      throw ewrlnc::ConfigError("layers: expected 1..4 or 'opt', got '" + raw.layers + "'");
    }
  }
  if (raw.weights == "frame")
    cfg.weights = ewrlnc::WeightKind::Frame;
  else if (raw.weights == "throughput")
    cfg.weights = ewrlnc::WeightKind::Throughput;
  else
    throw ewrlnc::ConfigError("weights: expected frame|throughput, got '" + raw.weights + "'");
  if (raw.scheme == "rlnc")
    cfg.scheme = ewrlnc::TxScheme::FeedbackFreeRlnc;
  else if (raw.scheme == "mdp")
    cfg.scheme = ewrlnc::TxScheme::FullFeedbackMdp;
  else if (raw.scheme == "uncoded")
    cfg.scheme = ewrlnc::TxScheme::Uncoded;
  else
    throw ewrlnc::ConfigError("scheme: expected rlnc|mdp|uncoded, got '" + raw.scheme + "'");
  if (raw.nt != RawOptions::kNtUnset) {
    if (raw.nt < 0) throw ewrlnc::ConfigError("nt: budget must be >= 0");
    cfg.nt_min = raw.nt;
    cfg.nt_max = raw.nt;
  }
  // optlayer always selects the layer count itself
  if (cfg.command == "optlayer") cfg.opt_layers = true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design and evaluation of layered RLNC broadcast policies"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from an INI file ([subcommand] sections)");

  ewrlnc::ExperimentConfig cfg;
  RawOptions raw;
  for (const char* name : {"design", "simulate", "pareto", "optlayer"}) {
    CLI::App* sub = app.add_subcommand(name, "");
    add_common_options(sub, raw, cfg);
  }
  app.get_subcommand("design")->description("Compute optimal policies and analytic metrics");
  app.get_subcommand("simulate")->description("Design, then Monte-Carlo check the policies");
  app.get_subcommand("pareto")->description("Sweep the mean/fairness weighted-sum trade-off");
  app.get_subcommand("optlayer")->description("Compare adaptive layer selection to fixed layers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    finish_config(raw, cfg);
    ewrlnc::run_and_write(cfg);
  } catch (const ewrlnc::ResourceLimitError& e) {
    std::fprintf(stderr, "resource limit: %s\n", e.what());
    return kExitResourceError;
  } catch (const ewrlnc::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const ewrlnc::ContractError& e) {
    std::fprintf(stderr, "input error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
