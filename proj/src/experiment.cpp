#include "ewrlnc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "ewrlnc/analytic.hpp"
#include "ewrlnc/channel.hpp"

namespace ewrlnc {

namespace detail {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string format_alloc(const Eigen::VectorXi& values) {
  std::string out;
  for (int i = 0; i < values.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(values[i]);
  }
  return out;
}

}  // namespace detail

namespace {

using nlohmann::json;

std::string scheme_name(TxScheme scheme) {
  switch (scheme) {
    case TxScheme::FeedbackFreeRlnc: return "rlnc";
    case TxScheme::FullFeedbackMdp: return "mdp";
    case TxScheme::Uncoded: return "uncoded";
  }
  return "?";
}

std::string weights_name(WeightKind kind) {
  return kind == WeightKind::Frame ? "frame" : "throughput";
}

int users_of(const ExperimentConfig& cfg) { return static_cast<int>(cfg.pes.size()); }

int nt_last(const ExperimentConfig& cfg) { return cfg.nt_max < 0 ? cfg.nt_min : cfg.nt_max; }

AggregateSpec make_aggregate(const ExperimentConfig& cfg) {
  if (cfg.agg_kind == "mean") return AggregateSpec::mean();
  if (cfg.agg_kind == "weights") return AggregateSpec::linear(cfg.agg_weights);
  if (cfg.agg_kind == "jain") return AggregateSpec::jain();
  if (cfg.agg_kind == "weightedsum") return AggregateSpec::weighted_sum(cfg.lambda);
  throw ConfigError("agg: unknown aggregate '" + cfg.agg_kind + "'");
}

Eigen::VectorXd mdp_weights(const ExperimentConfig& cfg) {
  const int users = users_of(cfg);
  if (cfg.agg_kind == "mean")
    return Eigen::VectorXd::Constant(users, 1.0 / double(users));
  return cfg.agg_weights;  // validate_config guarantees agg_kind == "weights"
}

// GOPs resolved to concrete layouts; `candidates` is used by the
// opt-layer paths, `fixed` otherwise.
struct GopInstance {
  int gop = 0;
  GopLayout fixed;
  std::vector<GopLayout> candidates;
  std::vector<int> candidate_layers;
};

std::vector<GopInstance> resolve_gops(const ExperimentConfig& cfg, bool want_candidates) {
  std::vector<GopInstance> gops;
  if (!cfg.trace_path.empty()) {
    const auto trace = parse_gop_trace(cfg.trace_path, cfg.packet_bytes, cfg.header_bytes);
    gops.reserve(trace.size());
    for (std::size_t g = 0; g < trace.size(); ++g) {
      GopInstance inst;
      inst.gop = static_cast<int>(g);
      if (want_candidates) {
        for (int layers = 1; layers <= 4; ++layers) {
          inst.candidates.push_back(layout_for(trace[g], layers, cfg.weights));
          inst.candidate_layers.push_back(layers);
        }
      } else {
        inst.fixed = layout_for(trace[g], cfg.layers, cfg.weights);
      }
      gops.push_back(std::move(inst));
    }
    return gops;
  }

  const auto to_layout = [&](const Eigen::VectorXi& packets) {
    GopLayout layout = make_layout(packets);
    if (cfg.weights == WeightKind::Throughput) layout.weights = throughput_weights(layout);
    return layout;
  };
  if (want_candidates) {
    GopInstance inst;
    for (const auto& packets : cfg.explicit_k) {
      inst.candidates.push_back(to_layout(packets));
      inst.candidate_layers.push_back(static_cast<int>(packets.size()));
    }
    gops.push_back(std::move(inst));
  } else {
    for (std::size_t g = 0; g < cfg.explicit_k.size(); ++g) {
      GopInstance inst;
      inst.gop = static_cast<int>(g);
      inst.fixed = to_layout(cfg.explicit_k[g]);
      gops.push_back(std::move(inst));
    }
  }
  return gops;
}

std::vector<int> budget_grid(const ExperimentConfig& cfg) {
  std::vector<int> grid;
  for (int nt = cfg.nt_min; nt <= nt_last(cfg); nt += cfg.nt_step) grid.push_back(nt);
  return grid;
}

std::string dump_path_for(const std::string& stem, int gop, int nt) {
  const std::string tag = "-g" + std::to_string(gop) + "-nt" + std::to_string(nt);
  const auto dot = stem.find_last_of('.');
  if (dot == std::string::npos || stem.find('/', dot) != std::string::npos)
    return stem + tag + ".json";
  return stem.substr(0, dot) + tag + stem.substr(dot);
}

void write_mdp_dump(const MdpSolution& sol, const GopLayout& layout, const std::string& path) {
  json j;
  j["horizon"] = sol.horizon;
  j["users"] = sol.users;
  j["layout"] = {{"packets", std::vector<int>(layout.packets.begin(), layout.packets.end())},
                 {"weights", std::vector<double>(layout.weights.begin(), layout.weights.end())}};
  j["pe"] = std::vector<double>(sol.pe.begin(), sol.pe.end());
  j["agg_weights"] = std::vector<double>(sol.agg_weights.begin(), sol.agg_weights.end());
  j["state_encoding"] =
      "mixed-radix over deficits, d_1 most significant; multi-user states nest per-user "
      "indices with user 1 most significant";
  j["eta"] = sol.eta;
  json values = json::array();
  json policy = json::array();
  for (int t = 0; t <= sol.horizon; ++t) {
    values.push_back(std::vector<double>(sol.values.col(t).begin(), sol.values.col(t).end()));
    policy.push_back(std::vector<int>(sol.policy.col(t).begin(), sol.policy.col(t).end()));
  }
  j["values"] = std::move(values);
  j["policy"] = std::move(policy);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write MDP dump to '" + path + "'");
  out << j.dump(1) << '\n';
}

// Design outcome of one (gop, Nt) cell.
struct DesignUnit {
  int gop = 0;
  int nt = 0;
  GopLayout layout;
  std::string layers_mode = "fixed";
  std::optional<TxPolicy> policy;        // open-loop schemes
  std::optional<MdpSolution> solution;   // full-feedback scheme
  Eigen::VectorXd per_user_eta;
  double eta_tot = 0.0;
};

MdpSolution solve_for(const ExperimentConfig& cfg, const GopLayout& layout, int nt) {
  if (users_of(cfg) == 1)
    return solve_single(layout, cfg.pes[0], nt, cfg.mdp_cap);
  return solve_multi(layout, cfg.pes, nt, mdp_weights(cfg), cfg.mdp_cap);
}

DesignUnit design_cell(const ExperimentConfig& cfg, const GopInstance& inst, int nt) {
  DesignUnit unit;
  unit.gop = inst.gop;
  unit.nt = nt;
  const bool opt = cfg.opt_layers;
  unit.layers_mode = opt ? "opt" : "fixed";

  if (cfg.scheme == TxScheme::FullFeedbackMdp) {
    if (opt) {
      std::optional<MdpSolution> best;
      int best_layers = 0;
      std::size_t best_index = 0;
      for (std::size_t i = 0; i < inst.candidates.size(); ++i) {
        MdpSolution sol = solve_for(cfg, inst.candidates[i], nt);
        const int layers = inst.candidates[i].layers();
        if (!best || sol.eta > best->eta || (sol.eta == best->eta && layers < best_layers)) {
          best = std::move(sol);
          best_layers = layers;
          best_index = i;
        }
      }
      unit.layout = inst.candidates[best_index];
      unit.solution = std::move(best);
    } else {
      unit.layout = inst.fixed;
      unit.solution = solve_for(cfg, inst.fixed, nt);
    }
    unit.eta_tot = unit.solution->eta;
    unit.per_user_eta = unit.solution->per_user_eta;
    if (!cfg.dump_mdp.empty())
      write_mdp_dump(*unit.solution, unit.layout, dump_path_for(cfg.dump_mdp, unit.gop, nt));
    return unit;
  }

  const Scheme scheme = cfg.scheme == TxScheme::Uncoded ? Scheme::Uncoded : Scheme::Rlnc;
  const AggregateSpec agg = make_aggregate(cfg);
  if (opt) {
    const OptLayerResult r = select_opt_layer(inst.candidates, cfg.pes, nt, agg, scheme);
    unit.layout = inst.candidates[static_cast<std::size_t>(r.index)];
    unit.policy = r.policy;
    unit.eta_tot = r.eta_tot;
    unit.per_user_eta = r.per_user_eta;
  } else {
    const MultiPolicyResult r = optimize_multi(inst.fixed, cfg.pes, nt, agg, scheme);
    unit.layout = inst.fixed;
    unit.policy = r.policy;
    unit.eta_tot = r.eta_tot;
    unit.per_user_eta = r.per_user_eta;
  }
  return unit;
}

std::vector<DesignUnit> design_all(const ExperimentConfig& cfg) {
  const auto gops = resolve_gops(cfg, cfg.opt_layers);
  std::vector<DesignUnit> units;
  for (const auto& inst : gops)
    for (const int nt : budget_grid(cfg)) units.push_back(design_cell(cfg, inst, nt));
  return units;
}

void sort_rows(ResultTable& table) {
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.gop != b.gop) return a.gop < b.gop;
                     if (a.user != b.user) return a.user < b.user;
                     if (a.nt != b.nt) return a.nt < b.nt;
                     return a.lambda < b.lambda;
                   });
}

struct RowPrefix {
  std::string hash;
  std::string seed;
  std::string command;
  std::string scheme;
};

RowPrefix row_prefix(const ExperimentConfig& cfg) {
  return RowPrefix{config_hash(cfg), std::to_string(cfg.seed), cfg.command,
                   scheme_name(cfg.scheme)};
}

std::string policy_cell(const DesignUnit& unit) {
  return unit.policy ? detail::format_alloc(unit.policy->allocation) : "mdp";
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  const bool known = cfg.command == "design" || cfg.command == "simulate" ||
                     cfg.command == "pareto" || cfg.command == "optlayer";
  if (!known) throw ConfigError("command: expected design|simulate|pareto|optlayer, got '" +
                                cfg.command + "'");

  if (cfg.explicit_k.empty() == cfg.trace_path.empty())
    throw ConfigError("gop source: exactly one of --K and --trace is required");
  for (const auto& packets : cfg.explicit_k) {
    if (packets.size() < 1) throw ConfigError("K: a layout needs at least one layer");
    if ((packets.array() < 1).any())
      throw ConfigError("K: every layer needs at least one packet");
  }
  if (cfg.command == "optlayer" && !cfg.explicit_k.empty()) {
    std::vector<bool> seen(5, false);
    for (const auto& packets : cfg.explicit_k) {
      const auto layers = packets.size();
      if (layers > 4) throw ConfigError("K: optlayer candidates must have 1..4 layers");
      if (seen[static_cast<std::size_t>(layers)])
        throw ConfigError("K: optlayer candidates need distinct layer counts");
      seen[static_cast<std::size_t>(layers)] = true;
    }
  }
  if (!cfg.trace_path.empty() && !cfg.opt_layers && (cfg.layers < 1 || cfg.layers > 4))
    throw ConfigError("layers: trace packetization needs a layer count in 1..4");

  if (cfg.pes.size() < 1) throw ConfigError("pe: at least one packet error rate is required");
  for (int u = 0; u < cfg.pes.size(); ++u)
    if (!(cfg.pes[u] >= 0.0 && cfg.pes[u] < 1.0))
      throw ConfigError("pe: rates must lie in [0, 1), got " +
                        detail::format_double(cfg.pes[u]));

  if (cfg.nt_min < 0) throw ConfigError("nt: budget must be >= 0");
  if (nt_last(cfg) < cfg.nt_min) throw ConfigError("nt: sweep end precedes start");
  if (cfg.nt_step < 1) throw ConfigError("nt: sweep step must be >= 1");

  if (cfg.agg_kind == "weights") {
    if (cfg.agg_weights.size() != cfg.pes.size())
      throw ConfigError("agg-weights: need one weight per user");
    if ((cfg.agg_weights.array() < 0.0).any() ||
        std::abs(cfg.agg_weights.sum() - 1.0) > 1e-9)
      throw ConfigError("agg-weights: must be nonnegative and sum to 1");
  } else if (cfg.agg_kind == "weightedsum") {
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
      throw ConfigError("lambda: must lie in [0, 1]");
  } else if (cfg.agg_kind != "mean" && cfg.agg_kind != "jain") {
    throw ConfigError("agg: expected mean|weights|jain|weightedsum, got '" + cfg.agg_kind + "'");
  }

  if (cfg.scheme == TxScheme::FullFeedbackMdp) {
    if (cfg.agg_kind != "mean" && cfg.agg_kind != "weights")
      throw ConfigError("agg: the full-feedback scheme needs a linear aggregate (mean|weights)");
    if (cfg.command == "pareto")
      throw ConfigError("command: pareto supports the rlnc and uncoded schemes");
  }

  if (cfg.command == "simulate" && cfg.trials < 1)
    throw ConfigError("trials: simulate needs at least one trial");
  if (cfg.trials < 0) throw ConfigError("trials: must be >= 0");
  if (cfg.command == "pareto" && cfg.lambda_count < 2)
    throw ConfigError("lambda-count: the sweep needs at least two points");

  if (cfg.packet_bytes - cfg.header_bytes < 1)
    throw ConfigError("packet-bytes/header-bytes: no payload left per packet");
  if (cfg.header_bytes < 0) throw ConfigError("header-bytes: must be >= 0");
  if (cfg.mdp_cap < 1) throw ConfigError("mdp-cap: must be >= 1");
  if (cfg.out_csv.empty()) throw ConfigError("out: an output CSV path is required");
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", cfg.command);
  kv.emplace_back("scheme", scheme_name(cfg.scheme));
  std::string ks;
  for (const auto& packets : cfg.explicit_k) {
    if (!ks.empty()) ks += '|';
    ks += detail::format_alloc(packets);
  }
  kv.emplace_back("K", ks);
  kv.emplace_back("trace", cfg.trace_path);
  kv.emplace_back("layers", cfg.opt_layers ? "opt" : std::to_string(cfg.layers));
  kv.emplace_back("weights", weights_name(cfg.weights));
  std::string pes;
  for (int u = 0; u < cfg.pes.size(); ++u) {
    if (u) pes += ',';
    pes += detail::format_double(cfg.pes[u]);
  }
  kv.emplace_back("pe", pes);
  kv.emplace_back("seed", std::to_string(cfg.seed));
  kv.emplace_back("nt_min", std::to_string(cfg.nt_min));
  kv.emplace_back("nt_max", std::to_string(nt_last(cfg)));
  kv.emplace_back("nt_step", std::to_string(cfg.nt_step));
  kv.emplace_back("agg", cfg.agg_kind);
  std::string ws;
  for (int u = 0; u < cfg.agg_weights.size(); ++u) {
    if (u) ws += ',';
    ws += detail::format_double(cfg.agg_weights[u]);
  }
  kv.emplace_back("agg_weights", ws);
  kv.emplace_back("lambda", detail::format_double(cfg.lambda));
  kv.emplace_back("lambda_count", std::to_string(cfg.lambda_count));
  kv.emplace_back("trials", std::to_string(cfg.trials));
  kv.emplace_back("packet_bytes", std::to_string(cfg.packet_bytes));
  kv.emplace_back("header_bytes", std::to_string(cfg.header_bytes));
  kv.emplace_back("mdp_cap", std::to_string(cfg.mdp_cap));

  std::uint64_t h = 0xCBF29CE484222325ULL;
  const auto eat = [&](const std::string& s) {
    for (const unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
  };
  for (const auto& [k, v] : kv) {
    eat(k);
    eat("=");
    eat(v);
    eat("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<GopFrameSizes> parse_gop_trace(const std::string& path, int packet_bytes,
                                           int header_bytes) {
  std::ifstream in(path);
  if (!in) throw ConfigError("trace: cannot open '" + path + "'");
  std::vector<GopFrameSizes> gops;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::int64_t> sizes;
    std::int64_t value = 0;
    while (ss >> value) sizes.push_back(value);
    if (!ss.eof()) {
      std::string tail;
      ss.clear();
      ss >> tail;
      throw ConfigError("trace line " + std::to_string(lineno) + ": bad token '" + tail + "'");
    }
    if (sizes.empty()) continue;  // blank or comment-only line
    if (sizes.size() != kFramesPerGop)
      throw ConfigError("trace line " + std::to_string(lineno) + ": expected " +
                        std::to_string(kFramesPerGop) + " frame sizes, got " +
                        std::to_string(sizes.size()));
    GopFrameSizes gop;
    for (int i = 0; i < kFramesPerGop; ++i) {
      if (sizes[static_cast<std::size_t>(i)] < 0)
        throw ConfigError("trace line " + std::to_string(lineno) + ": negative frame size");
      gop.bytes[i] = sizes[static_cast<std::size_t>(i)];
    }
    gop.packet_len = packet_bytes;
    gop.header_len = header_bytes;
    gops.push_back(gop);
  }
  if (gops.empty()) throw ConfigError("trace: '" + path + "' holds no GOP records");
  return gops;
}

ResultTable run_design(const ExperimentConfig& cfg) {
  ResultTable table;
  table.columns = {"config", "seed",   "command", "gop",    "user",   "scheme", "layers_mode",
                   "L",      "K",      "Nt",      "lambda", "policy", "eta_user", "eta_tot"};
  const RowPrefix pre = row_prefix(cfg);
  for (const DesignUnit& unit : design_all(cfg)) {
    for (int u = 0; u < unit.per_user_eta.size(); ++u) {
      ResultRow row;
      row.gop = unit.gop;
      row.user = u + 1;
      row.nt = unit.nt;
      row.cells = {pre.hash,
                   pre.seed,
                   pre.command,
                   std::to_string(unit.gop),
                   std::to_string(u + 1),
                   pre.scheme,
                   unit.layers_mode,
                   std::to_string(unit.layout.layers()),
                   detail::format_alloc(unit.layout.packets),
                   std::to_string(unit.nt),
                   "",
                   policy_cell(unit),
                   detail::format_double(unit.per_user_eta[u]),
                   detail::format_double(unit.eta_tot)};
      table.rows.push_back(std::move(row));
    }
  }
  sort_rows(table);
  return table;
}

ResultTable run_simulate(const ExperimentConfig& cfg) {
  ResultTable table;
  table.columns = {"config",   "seed",    "command", "gop",      "user",
                   "scheme",   "layers_mode", "L",   "K",        "Nt",
                   "lambda",   "policy",  "eta_user", "eta_tot", "trials",
                   "sim_mean", "sim_se",  "within_3se"};
  const RowPrefix pre = row_prefix(cfg);
  bool all_within = true;
  for (const DesignUnit& unit : design_all(cfg)) {
    // every GOP gets its own erasure substream
    const ChannelSpec spec{cfg.pes, mix_seed(cfg.seed, std::uint64_t(unit.gop) + 1)};
    std::vector<SimResult> per_user;
    if (unit.solution && unit.solution->users > 1) {
      per_user = monte_carlo_multi(unit.layout, *unit.solution, spec, cfg.trials);
    } else {
      for (int u = 0; u < users_of(cfg); ++u) {
        if (unit.solution)
          per_user.push_back(monte_carlo(unit.layout, *unit.solution, spec, u, cfg.trials));
        else if (cfg.scheme == TxScheme::Uncoded)
          per_user.push_back(monte_carlo_uncoded(unit.layout, *unit.policy, spec, u, cfg.trials));
        else
          per_user.push_back(monte_carlo(unit.layout, *unit.policy, spec, u, cfg.trials));
      }
    }
    for (int u = 0; u < users_of(cfg); ++u) {
      const SimResult& sim = per_user[static_cast<std::size_t>(u)];
      const double gap = std::abs(sim.mean_metric - unit.per_user_eta[u]);
      const bool within = gap <= 3.0 * sim.std_error + 1e-12;
      all_within = all_within && within;
      ResultRow row;
      row.gop = unit.gop;
      row.user = u + 1;
      row.nt = unit.nt;
      row.cells = {pre.hash,
                   pre.seed,
                   pre.command,
                   std::to_string(unit.gop),
                   std::to_string(u + 1),
                   pre.scheme,
                   unit.layers_mode,
                   std::to_string(unit.layout.layers()),
                   detail::format_alloc(unit.layout.packets),
                   std::to_string(unit.nt),
                   "",
                   policy_cell(unit),
                   detail::format_double(unit.per_user_eta[u]),
                   detail::format_double(unit.eta_tot),
                   std::to_string(sim.trials),
                   detail::format_double(sim.mean_metric),
                   detail::format_double(sim.std_error),
                   within ? "1" : "0"};
      table.rows.push_back(std::move(row));
    }
  }
  table.metadata.emplace_back("all_within_3se", all_within ? "true" : "false");
  sort_rows(table);
  return table;
}

ResultTable run_pareto(const ExperimentConfig& cfg) {
  ResultTable table;
  table.columns = {"config", "seed",     "command",  "gop",       "user",
                   "scheme", "layers_mode", "L",     "K",         "Nt",
                   "lambda", "policy",   "eta_user", "mean_eta",  "fairness",
                   "nondominated", "trials", "sim_mean", "sim_se", "within_3se"};
  const RowPrefix pre = row_prefix(cfg);
  const Scheme scheme = cfg.scheme == TxScheme::Uncoded ? Scheme::Uncoded : Scheme::Rlnc;
  Eigen::VectorXd grid(cfg.lambda_count);
  for (int i = 0; i < cfg.lambda_count; ++i)
    grid[i] = double(i) / double(cfg.lambda_count - 1);

  std::vector<std::string> degenerate;
  const auto gops = resolve_gops(cfg, cfg.opt_layers);
  for (const auto& inst : gops) {
    const ChannelSpec spec{cfg.pes, mix_seed(cfg.seed, std::uint64_t(inst.gop) + 1)};
    for (const int nt : budget_grid(cfg)) {
      std::vector<ParetoPoint> points;
      std::vector<int> point_layers;
      std::vector<Eigen::VectorXi> point_packets;
      if (cfg.opt_layers) {
        for (int i = 0; i < grid.size(); ++i) {
          const OptLayerResult r = select_opt_layer(inst.candidates, cfg.pes, nt,
                                                    AggregateSpec::weighted_sum(grid[i]), scheme);
          ParetoPoint point;
          point.lambda = grid[i];
          point.policy = r.policy;
          point.per_user_eta = r.per_user_eta;
          point.mean_eta = r.per_user_eta.mean();
          point.fairness = jain_index(r.per_user_eta);
          points.push_back(std::move(point));
          point_layers.push_back(inst.candidates[static_cast<std::size_t>(r.index)].layers());
          point_packets.push_back(inst.candidates[static_cast<std::size_t>(r.index)].packets);
        }
        const auto same_choice = [&](std::size_t i, std::size_t j) {
          return point_packets[i].size() == point_packets[j].size() &&
                 point_packets[i] == point_packets[j] &&
                 points[i].policy.allocation == points[j].policy.allocation;
        };
        for (std::size_t i = 0; i < points.size(); ++i) {
          bool dominated = false;
          for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
            if (same_choice(i, j)) continue;
            const bool no_worse = points[j].mean_eta >= points[i].mean_eta &&
                                  points[j].fairness >= points[i].fairness;
            const bool strictly = points[j].mean_eta > points[i].mean_eta ||
                                  points[j].fairness > points[i].fairness;
            dominated = no_worse && strictly;
          }
          points[i].nondominated = !dominated;
        }
      } else {
        points = pareto_sweep(inst.fixed, cfg.pes, nt, grid, scheme);
        point_layers.assign(points.size(), inst.fixed.layers());
        point_packets.assign(points.size(), inst.fixed.packets);
      }

      for (std::size_t i = 0; i < points.size(); ++i) {
        const ParetoPoint& point = points[i];
        if (point.per_user_eta.isZero(0.0))
          degenerate.push_back(detail::format_double(point.lambda));
        std::vector<SimResult> sims;
        if (cfg.trials > 0) {
          // rebuild the chosen layout with its own weights
          GopLayout chosen = make_layout(point_packets[i]);
          if (cfg.weights == WeightKind::Throughput)
            chosen.weights = throughput_weights(chosen);
          for (int u = 0; u < users_of(cfg); ++u) {
            if (scheme == Scheme::Uncoded)
              sims.push_back(monte_carlo_uncoded(chosen, point.policy, spec, u, cfg.trials));
            else
              sims.push_back(monte_carlo(chosen, point.policy, spec, u, cfg.trials));
          }
        }
        for (int u = 0; u < users_of(cfg); ++u) {
          ResultRow row;
          row.gop = inst.gop;
          row.user = u + 1;
          row.nt = nt;
          row.lambda = point.lambda;
          std::string sim_mean, sim_se, within;
          if (cfg.trials > 0) {
            const SimResult& sim = sims[static_cast<std::size_t>(u)];
            sim_mean = detail::format_double(sim.mean_metric);
            sim_se = detail::format_double(sim.std_error);
            within = std::abs(sim.mean_metric - point.per_user_eta[u]) <=
                             3.0 * sim.std_error + 1e-12
                         ? "1"
                         : "0";
          }
          row.cells = {pre.hash,
                       pre.seed,
                       pre.command,
                       std::to_string(inst.gop),
                       std::to_string(u + 1),
                       pre.scheme,
                       cfg.opt_layers ? "opt" : "fixed",
                       std::to_string(point_layers[i]),
                       detail::format_alloc(point_packets[i]),
                       std::to_string(nt),
                       detail::format_double(point.lambda),
                       detail::format_alloc(point.policy.allocation),
                       detail::format_double(point.per_user_eta[u]),
                       detail::format_double(point.mean_eta),
                       detail::format_double(point.fairness),
                       point.nondominated ? "1" : "0",
                       std::to_string(cfg.trials),
                       sim_mean,
                       sim_se,
                       within};
          table.rows.push_back(std::move(row));
        }
      }
    }
  }
  if (!degenerate.empty()) {
    std::string joined;
    for (const auto& l : degenerate) {
      if (!joined.empty()) joined += ',';
      joined += l;
    }
    table.metadata.emplace_back("fairness_degenerate_lambdas", joined);
  }
  sort_rows(table);
  return table;
}

ResultTable run_optlayer(const ExperimentConfig& cfg) {
  ResultTable table;
  table.columns = {"config", "seed",   "command",  "gop",     "user",   "scheme",
                   "layers_mode", "Nt", "chosen_L", "K",      "policy", "eta_user",
                   "eta_tot", "eta_L1", "eta_L2",   "eta_L3", "eta_L4"};
  const RowPrefix pre = row_prefix(cfg);
  const auto gops = resolve_gops(cfg, true);
  for (const auto& inst : gops) {
    for (const int nt : budget_grid(cfg)) {
      std::array<std::string, 4> fixed_eta;
      DesignUnit unit;
      if (cfg.scheme == TxScheme::FullFeedbackMdp) {
        std::optional<MdpSolution> best;
        int best_layers = 0;
        std::size_t best_index = 0;
        for (std::size_t i = 0; i < inst.candidates.size(); ++i) {
          MdpSolution sol = solve_for(cfg, inst.candidates[i], nt);
          const int layers = inst.candidates[i].layers();
          if (layers >= 1 && layers <= 4)
            fixed_eta[static_cast<std::size_t>(layers - 1)] = detail::format_double(sol.eta);
          if (!best || sol.eta > best->eta || (sol.eta == best->eta && layers < best_layers)) {
            best = std::move(sol);
            best_layers = layers;
            best_index = i;
          }
        }
        unit.layout = inst.candidates[best_index];
        unit.eta_tot = best->eta;
        unit.per_user_eta = best->per_user_eta;
        unit.solution = std::move(best);
      } else {
        const Scheme scheme = cfg.scheme == TxScheme::Uncoded ? Scheme::Uncoded : Scheme::Rlnc;
        const AggregateSpec agg = make_aggregate(cfg);
        for (std::size_t i = 0; i < inst.candidates.size(); ++i) {
          const MultiPolicyResult r = optimize_multi(inst.candidates[i], cfg.pes, nt, agg, scheme);
          const int layers = inst.candidates[i].layers();
          if (layers >= 1 && layers <= 4)
            fixed_eta[static_cast<std::size_t>(layers - 1)] = detail::format_double(r.eta_tot);
        }
        const OptLayerResult r = select_opt_layer(inst.candidates, cfg.pes, nt, agg, scheme);
        unit.layout = inst.candidates[static_cast<std::size_t>(r.index)];
        unit.policy = r.policy;
        unit.eta_tot = r.eta_tot;
        unit.per_user_eta = r.per_user_eta;
      }
      for (int u = 0; u < users_of(cfg); ++u) {
        ResultRow row;
        row.gop = inst.gop;
        row.user = u + 1;
        row.nt = nt;
        row.cells = {pre.hash,
                     pre.seed,
                     pre.command,
                     std::to_string(inst.gop),
                     std::to_string(u + 1),
                     pre.scheme,
                     "opt",
                     std::to_string(nt),
                     std::to_string(unit.layout.layers()),
                     detail::format_alloc(unit.layout.packets),
                     policy_cell(unit),
                     detail::format_double(unit.per_user_eta[u]),
                     detail::format_double(unit.eta_tot),
                     fixed_eta[0],
                     fixed_eta[1],
                     fixed_eta[2],
                     fixed_eta[3]};
        table.rows.push_back(std::move(row));
      }
    }
  }
  sort_rows(table);
  return table;
}

ResultTable run_experiment(const ExperimentConfig& cfg) {
  validate_config(cfg);
  if (cfg.command == "design") return run_design(cfg);
  if (cfg.command == "simulate") return run_simulate(cfg);
  if (cfg.command == "pareto") return run_pareto(cfg);
  return run_optlayer(cfg);
}

void write_csv(const ResultTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write CSV to '" + path + "'");
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << table.columns[i];
  }
  out << '\n';
  for (const ResultRow& row : table.rows) {
    for (std::size_t i = 0; i < row.cells.size(); ++i) {
      if (i) out << ',';
      out << row.cells[i];
    }
    out << '\n';
  }
}

void write_json(const ResultTable& table, const ExperimentConfig& cfg, const std::string& path) {
  json j;
  j["command"] = cfg.command;
  j["config_hash"] = config_hash(cfg);
  j["generator"] = kGeneratorName;
  json config;
  config["scheme"] = scheme_name(cfg.scheme);
  json ks = json::array();
  for (const auto& packets : cfg.explicit_k)
    ks.push_back(std::vector<int>(packets.begin(), packets.end()));
  config["K"] = std::move(ks);
  config["trace"] = cfg.trace_path;
  config["layers"] = cfg.opt_layers ? "opt" : std::to_string(cfg.layers);
  config["weights"] = weights_name(cfg.weights);
  config["pe"] = std::vector<double>(cfg.pes.begin(), cfg.pes.end());
  config["seed"] = cfg.seed;
  config["nt_min"] = cfg.nt_min;
  config["nt_max"] = nt_last(cfg);
  config["nt_step"] = cfg.nt_step;
  config["agg"] = cfg.agg_kind;
  config["agg_weights"] = std::vector<double>(cfg.agg_weights.begin(), cfg.agg_weights.end());
  config["lambda"] = cfg.lambda;
  config["lambda_count"] = cfg.lambda_count;
  config["trials"] = cfg.trials;
  config["packet_bytes"] = cfg.packet_bytes;
  config["header_bytes"] = cfg.header_bytes;
  config["mdp_cap"] = cfg.mdp_cap;
  j["config"] = std::move(config);
  j["columns"] = table.columns;
  json rows = json::array();
  for (const ResultRow& row : table.rows) rows.push_back(row.cells);
  j["rows"] = std::move(rows);
  json meta;
  for (const auto& [k, v] : table.metadata) meta[k] = v;
  j["metadata"] = std::move(meta);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write JSON to '" + path + "'");
  out << j.dump(1) << '\n';
}

ResultTable run_and_write(const ExperimentConfig& cfg) {
  ResultTable table = run_experiment(cfg);
  write_csv(table, cfg.out_csv);
  if (!cfg.out_json.empty()) write_json(table, cfg, cfg.out_json);
  return table;
}

}  // namespace ewrlnc
