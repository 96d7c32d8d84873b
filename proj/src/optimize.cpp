#include "ewrlnc/optimize.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "ewrlnc/analytic.hpp"

namespace ewrlnc {

AggregateSpec AggregateSpec::mean() { return AggregateSpec{Kind::Mean, {}, 1.0}; }

AggregateSpec AggregateSpec::linear(Eigen::VectorXd weights) {
  return AggregateSpec{Kind::LinearWeights, std::move(weights), 1.0};
}

AggregateSpec AggregateSpec::jain() { return AggregateSpec{Kind::JainFairness, {}, 0.0}; }

AggregateSpec AggregateSpec::weighted_sum(double lambda) {
  return AggregateSpec{Kind::WeightedSumMeanFairness, {}, lambda};
}

double jain_index(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() < 1) detail::throw_contract("jain_index: empty input");
  if ((values.array() < 0.0).any())
    detail::throw_contract("jain_index: values must be nonnegative");
  const double sum = values.sum();
  const double sq = values.squaredNorm();
  if (sq == 0.0) return 1.0;  // degenerate all-zero input
  return sum * sum / (double(values.size()) * sq);
}

double AggregateSpec::evaluate(const Eigen::Ref<const Eigen::VectorXd>& values) const {
  if (values.size() < 1) detail::throw_contract("AggregateSpec: empty input");
  switch (kind) {
    case Kind::Mean:
      return values.mean();
    case Kind::LinearWeights: {
      if (weights.size() != values.size())
        detail::throw_contract("AggregateSpec: " + std::to_string(weights.size()) +
                               " weights for " + std::to_string(values.size()) + " users");
      if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9)
        detail::throw_contract("AggregateSpec: weights must be nonnegative and sum to 1");
      return weights.dot(values);
    }
    case Kind::JainFairness:
      return jain_index(values);
    case Kind::WeightedSumMeanFairness: {
      if (!(lambda >= 0.0 && lambda <= 1.0))
        detail::throw_contract("AggregateSpec: lambda must lie in [0, 1]");
      return lambda * values.mean() + (1.0 - lambda) * jain_index(values);
    }
  }
  detail::throw_contract("AggregateSpec: unknown kind");
}

std::int64_t policy_count(int layers, int budget) {
  if (layers < 1 || budget < 0) detail::throw_contract("policy_count: bad arguments");
  std::int64_t count = 1;
  for (int i = 1; i < layers; ++i) count = count * (budget + i) / i;
  return count;
}

namespace {

// Walks all compositions in reverse-lexicographic order without
// materializing them.
template <typename Fn>
void for_each_policy(int layers, int budget, Fn&& fn) {
  Eigen::VectorXi alloc(layers);
  const auto recurse = [&](auto&& self, int layer, int remaining) -> void {
    if (layer == layers - 1) {
      alloc[layer] = remaining;
      fn(static_cast<const Eigen::VectorXi&>(alloc));
      return;
    }
    for (int n = remaining; n >= 0; --n) {
      alloc[layer] = n;
      self(self, layer + 1, remaining - n);
    }
  };
  recurse(recurse, 0, budget);
}

double score_policy(const GopLayout& layout, const TxPolicy& policy, double pe, Scheme scheme) {
  return scheme == Scheme::Rlnc ? eta(layout, policy, pe) : uncoded_eta(layout, policy, pe);
}

}  // namespace

std::vector<TxPolicy> enumerate_policies(int layers, int budget) {
  if (layers < 1) detail::throw_contract("enumerate_policies: layers must be >= 1");
  if (budget < 0) detail::throw_contract("enumerate_policies: budget must be >= 0");
  std::vector<TxPolicy> out;
  out.reserve(static_cast<std::size_t>(policy_count(layers, budget)));
  for_each_policy(layers, budget, [&](const Eigen::VectorXi& alloc) {
    out.push_back(TxPolicy{alloc});
  });
  return out;
}

SinglePolicyResult optimize_single(const GopLayout& layout, double pe, int budget, Scheme scheme) {
  if (!validate_weights(layout))
    detail::throw_contract("optimize_single: layout fails weight validation");
  detail::check_pe(pe);
  if (budget < 0) detail::throw_contract("optimize_single: budget must be >= 0");
  SinglePolicyResult best;
  best.eta = -std::numeric_limits<double>::infinity();
  for_each_policy(layout.layers(), budget, [&](const Eigen::VectorXi& alloc) {
    const TxPolicy candidate{alloc};
    const double value = score_policy(layout, candidate, pe, scheme);
    if (value > best.eta) {
      best.eta = value;
      best.policy = candidate;
    }
  });
  return best;
}

MultiPolicyResult optimize_multi(const GopLayout& layout,
                                 const Eigen::Ref<const Eigen::VectorXd>& pes, int budget,
                                 const AggregateSpec& agg, Scheme scheme) {
  if (!validate_weights(layout))
    detail::throw_contract("optimize_multi: layout fails weight validation");
  const int users = static_cast<int>(pes.size());
  if (users < 1) detail::throw_contract("optimize_multi: at least one user required");
  for (int u = 0; u < users; ++u) detail::check_pe(pes[u]);
  if (budget < 0) detail::throw_contract("optimize_multi: budget must be >= 0");

  MultiPolicyResult best;
  best.eta_tot = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd per_user(users);
  for_each_policy(layout.layers(), budget, [&](const Eigen::VectorXi& alloc) {
    const TxPolicy candidate{alloc};
    for (int u = 0; u < users; ++u)
      per_user[u] = score_policy(layout, candidate, pes[u], scheme);
    const double value = agg.evaluate(per_user);
    if (value > best.eta_tot) {
      best.eta_tot = value;
      best.policy = candidate;
      best.per_user_eta = per_user;
    }
  });
  return best;
}

Eigen::VectorXd default_lambda_grid() {
  Eigen::VectorXd grid(51);
  for (int i = 0; i < 51; ++i) grid[i] = double(i) / 50.0;
  return grid;
}

std::vector<ParetoPoint> pareto_sweep(const GopLayout& layout,
                                      const Eigen::Ref<const Eigen::VectorXd>& pes, int budget,
                                      const Eigen::Ref<const Eigen::VectorXd>& lambda_grid,
                                      Scheme scheme) {
  if (!validate_weights(layout))
    detail::throw_contract("pareto_sweep: layout fails weight validation");
  const int users = static_cast<int>(pes.size());
  if (users < 1) detail::throw_contract("pareto_sweep: at least one user required");
  for (int u = 0; u < users; ++u) detail::check_pe(pes[u]);
  for (int i = 0; i < lambda_grid.size(); ++i)
    if (!(lambda_grid[i] >= 0.0 && lambda_grid[i] <= 1.0))
      detail::throw_contract("pareto_sweep: lambda grid must lie in [0, 1]");

  // Per-user metrics do not depend on lambda; score the policy set once.
  std::vector<TxPolicy> policies = enumerate_policies(layout.layers(), budget);
  const int count = static_cast<int>(policies.size());
  Eigen::MatrixXd etas(count, users);
  for (int p = 0; p < count; ++p)
    for (int u = 0; u < users; ++u)
      etas(p, u) = score_policy(layout, policies[p], pes[u], scheme);
  const Eigen::VectorXd means = etas.rowwise().mean();
  Eigen::VectorXd fairness(count);
  for (int p = 0; p < count; ++p) fairness[p] = jain_index(etas.row(p).transpose());

  std::vector<ParetoPoint> points;
  points.reserve(static_cast<std::size_t>(lambda_grid.size()));
  std::vector<int> chosen(static_cast<std::size_t>(lambda_grid.size()));
  for (int i = 0; i < lambda_grid.size(); ++i) {
    const double lambda = lambda_grid[i];
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < count; ++p) {
      const double value = lambda * means[p] + (1.0 - lambda) * fairness[p];
      if (value > best_value) {
        best_value = value;
        best = p;
      }
    }
    chosen[static_cast<std::size_t>(i)] = best;
    ParetoPoint point;
    point.lambda = lambda;
    point.policy = policies[best];
    point.mean_eta = means[best];
    point.fairness = fairness[best];
    point.per_user_eta = etas.row(best).transpose();
    points.push_back(std::move(point));
  }

  // Dominance among the swept policies; identical policies share a fate.
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int pi = chosen[i];
    bool dominated = false;
    for (std::size_t j = 0; j < points.size() && !dominated; ++j) {
      const int pj = chosen[j];
      if (policies[pj].allocation == policies[pi].allocation) continue;
      const bool no_worse =
          means[pj] >= means[pi] && fairness[pj] >= fairness[pi];
      const bool strictly_better = means[pj] > means[pi] || fairness[pj] > fairness[pi];
      dominated = no_worse && strictly_better;
    }
    points[i].nondominated = !dominated;
  }
  return points;
}

OptLayerResult select_opt_layer(const std::vector<GopLayout>& candidates,
                                const Eigen::Ref<const Eigen::VectorXd>& pes, int budget,
                                const AggregateSpec& agg, Scheme scheme) {
  if (candidates.empty()) detail::throw_contract("select_opt_layer: no candidate layouts");
  OptLayerResult best;
  best.eta_tot = -std::numeric_limits<double>::infinity();
  int best_layers = std::numeric_limits<int>::max();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    MultiPolicyResult r = optimize_multi(candidates[i], pes, budget, agg, scheme);
    const int layers = candidates[i].layers();
    if (r.eta_tot > best.eta_tot || (r.eta_tot == best.eta_tot && layers < best_layers)) {
      best.index = static_cast<int>(i);
      best.policy = std::move(r.policy);
      best.eta_tot = r.eta_tot;
      best.per_user_eta = std::move(r.per_user_eta);
      best_layers = layers;
    }
  }
  return best;
}

}  // namespace ewrlnc
