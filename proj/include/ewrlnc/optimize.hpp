#pragma once

#include <Eigen/Dense>

#include <vector>

#include "ewrlnc/core.hpp"

namespace ewrlnc {

enum class Scheme { Rlnc, Uncoded };

// How per-user metrics are folded into one objective.
struct AggregateSpec {
  enum class Kind { LinearWeights, Mean, JainFairness, WeightedSumMeanFairness };

  Kind kind = Kind::Mean;
  Eigen::VectorXd weights;  // LinearWeights only; nonnegative, sums to 1
  double lambda = 1.0;      // WeightedSumMeanFairness only; in [0, 1]

  static AggregateSpec mean();
  static AggregateSpec linear(Eigen::VectorXd weights);
  static AggregateSpec jain();
  static AggregateSpec weighted_sum(double lambda);

  // Folds per-user values; throws ContractError when the aggregate is
  // inconsistent with the input size or its own invariants.
  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& values) const;
};

// Jain's fairness index (sum z)^2 / (N sum z^2), in [1/N, 1] for
// nonnegative input with at least one positive entry. The all-zero
// input is defined as 1 (all users are equally served nothing);
// callers that care should flag that case in their own output.
double jain_index(const Eigen::Ref<const Eigen::VectorXd>& values);

// All compositions of `budget` transmissions into `layers` nonnegative
// window counts, in reverse-lexicographic order ([budget,0,...,0] first).
std::vector<TxPolicy> enumerate_policies(int layers, int budget);

// Number of such compositions: C(budget + layers - 1, layers - 1).
std::int64_t policy_count(int layers, int budget);

struct SinglePolicyResult {
  TxPolicy policy;
  double eta = 0.0;
};

// Exhaustive feedback-free policy search for one user. Ties keep the
// earliest policy in enumeration order, which puts spare transmissions
// on the most important windows.
SinglePolicyResult optimize_single(const GopLayout& layout, double pe, int budget, Scheme scheme);

struct MultiPolicyResult {
  TxPolicy policy;
  double eta_tot = 0.0;
  Eigen::VectorXd per_user_eta;
};

// Multi-user search: per-user metrics decouple for feedback-free
// schemes, so each candidate policy is scored per user and aggregated.
MultiPolicyResult optimize_multi(const GopLayout& layout,
                                 const Eigen::Ref<const Eigen::VectorXd>& pes, int budget,
                                 const AggregateSpec& agg, Scheme scheme);

struct ParetoPoint {
  double lambda = 0.0;
  TxPolicy policy;
  double mean_eta = 0.0;
  double fairness = 1.0;
  Eigen::VectorXd per_user_eta;
  bool nondominated = false;
};

// The 51-point lambda grid with 0.02 spacing.
Eigen::VectorXd default_lambda_grid();

// Weighted-sum sweep between mean performance (lambda = 1) and Jain
// fairness (lambda = 0). Returns one point per lambda; points whose
// policy is dominated by another swept policy in (mean_eta, fairness)
// have nondominated = false. Dominance requires no loss in either
// coordinate and a strict gain in one; duplicate policies are compared
// once.
std::vector<ParetoPoint> pareto_sweep(const GopLayout& layout,
                                      const Eigen::Ref<const Eigen::VectorXd>& pes, int budget,
                                      const Eigen::Ref<const Eigen::VectorXd>& lambda_grid,
                                      Scheme scheme);

struct OptLayerResult {
  int index = 0;  // position in the candidate list
  TxPolicy policy;
  double eta_tot = 0.0;
  Eigen::VectorXd per_user_eta;
};

// Evaluates every candidate layout (typically the L = 1..4
// packetizations of one GOP) and keeps the one with the best aggregate
// metric; ties go to the candidate with fewer layers.
OptLayerResult select_opt_layer(const std::vector<GopLayout>& candidates,
                                const Eigen::Ref<const Eigen::VectorXd>& pes, int budget,
                                const AggregateSpec& agg, Scheme scheme);

}  // namespace ewrlnc
