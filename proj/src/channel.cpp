#include "ewrlnc/channel.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "ewrlnc/analytic.hpp"

namespace ewrlnc {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the salted seed
  std::uint64_t z = seed + salt * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53

class SlotRng {
 public:
  explicit SlotRng(std::uint64_t seed) : engine_(seed) {}

  bool delivered(double pe) { return double(engine_() >> 11) * kInv53 < 1.0 - pe; }

 private:
  std::mt19937_64 engine_;
};

void check_user(const ChannelSpec& spec, int user) {
  if (user < 0 || user >= spec.users())
    detail::throw_contract("channel: user index " + std::to_string(user) + " outside 0.." +
                           std::to_string(spec.users() - 1));
  detail::check_pe(spec.per_user_pe[user]);
}

SlotVector draw_slots(std::uint64_t stream_seed, double pe, Eigen::Index count) {
  SlotRng rng(stream_seed);
  SlotVector slots(count);
  for (Eigen::Index i = 0; i < count; ++i) slots[i] = rng.delivered(pe);
  return slots;
}

SimResult summarize(std::uint64_t seed, const Eigen::VectorXd& metrics,
                    const Eigen::VectorXi& decoded) {
  SimResult result;
  result.trials = static_cast<int>(metrics.size());
  result.seed = seed;
  result.per_gop_decoded_layers.resize(1, decoded.size());
  result.per_gop_decoded_layers.row(0) = decoded.transpose();
  result.mean_metric = metrics.mean();
  if (metrics.size() > 1) {
    const double var =
        (metrics.array() - result.mean_metric).square().sum() / double(metrics.size() - 1);
    result.std_error = std::sqrt(var / double(metrics.size()));
  }
  return result;
}

template <typename Replay>
SimResult run_trials(const GopLayout& layout, const ChannelSpec& spec, int user, int budget,
                     int trials, Replay&& replay) {
  check_user(spec, user);
  if (trials < 1) detail::throw_contract("monte_carlo: trials must be >= 1");
  if (budget < 0) detail::throw_contract("monte_carlo: budget must be >= 0");
  const double pe = spec.per_user_pe[user];
  const std::uint64_t user_seed = mix_seed(spec.seed, std::uint64_t(user) + 1);
  Eigen::VectorXd metrics(trials);
  Eigen::VectorXi decoded(trials);
  for (int k = 0; k < trials; ++k) {
    const SlotVector slots = draw_slots(mix_seed(user_seed, std::uint64_t(k) + 1), pe, budget);
    const int layers = replay(slots);
    decoded[k] = layers;
    metrics[k] = layers >= 1 ? layout.weights[layers - 1] : 0.0;
  }
  return summarize(spec.seed, metrics, decoded);
}

}  // namespace

ErasurePattern generate_pattern(const ChannelSpec& spec, int user, Eigen::Index slots) {
  check_user(spec, user);
  if (slots < 0) detail::throw_contract("generate_pattern: slot count must be >= 0");
  ErasurePattern pattern;
  pattern.seed = spec.seed;
  pattern.user = user;
  pattern.slots =
      draw_slots(mix_seed(spec.seed, std::uint64_t(user) + 1), spec.per_user_pe[user], slots);
  return pattern;
}

int apply_policy(const GopLayout& layout, const TxPolicy& policy,
                 const Eigen::Ref<const SlotVector>& slots) {
  if (policy.windows() != layout.layers())
    detail::throw_contract("apply_policy: policy/layout layer count mismatch");
  if (slots.size() != policy.budget())
    detail::throw_contract("apply_policy: slice holds " + std::to_string(slots.size()) +
                           " slots, policy schedules " + std::to_string(policy.budget()));
  Eigen::VectorXi received = Eigen::VectorXi::Zero(layout.layers());
  Eigen::Index slot = 0;
  for (int l = 0; l < layout.layers(); ++l)
    for (int i = 0; i < policy.allocation[l]; ++i)
      if (slots[slot++]) ++received[l];
  return l_max(layout, received);
}

int apply_uncoded_policy(const GopLayout& layout, const TxPolicy& policy,
                         const Eigen::Ref<const SlotVector>& slots) {
  if (policy.windows() != layout.layers())
    detail::throw_contract("apply_uncoded_policy: policy/layout layer count mismatch");
  if (slots.size() != policy.budget())
    detail::throw_contract("apply_uncoded_policy: slice length must equal the policy budget");
  Eigen::Index slot = 0;
  int prefix = 0;
  bool chain = true;
  for (int l = 0; l < layout.layers(); ++l) {
    const int k = layout.packets[l];
    std::vector<bool> have(static_cast<std::size_t>(k), false);
    for (int i = 0; i < policy.allocation[l]; ++i)
      if (slots[slot++]) have[static_cast<std::size_t>(i % k)] = true;
    bool complete = true;
    for (const bool h : have) complete = complete && h;
    chain = chain && complete;
    if (chain) prefix = l + 1;
  }
  return prefix;
}

int apply_mdp_policy(const GopLayout& layout, const MdpSolution& solution,
                     const Eigen::Ref<const SlotVector>& slots) {
  if (solution.users != 1)
    detail::throw_contract("apply_mdp_policy: single-user replay of a multi-user solution");
  if (slots.size() != solution.horizon)
    detail::throw_contract("apply_mdp_policy: slice holds " + std::to_string(slots.size()) +
                           " slots, solution horizon is " + std::to_string(solution.horizon));
  const DeficitSpace space(layout);
  Eigen::VectorXi state = layout.packets;
  for (int t = solution.horizon; t >= 1; --t) {
    const int action = solution.policy(space.index(state), t);
    if (slots[solution.horizon - t]) state = transition(layout, state, action);
  }
  return decoded_prefix(state);
}

Eigen::VectorXi apply_mdp_policy_multi(const GopLayout& layout, const MdpSolution& solution,
                                       const Eigen::MatrixX<bool>& slots_per_user) {
  const int users = solution.users;
  if (static_cast<int>(slots_per_user.cols()) != users)
    detail::throw_contract("apply_mdp_policy_multi: one slot column per user required");
  if (slots_per_user.rows() != solution.horizon)
    detail::throw_contract("apply_mdp_policy_multi: slot rows must equal the solution horizon");
  const DeficitSpace space(layout);
  std::vector<Eigen::VectorXi> state(static_cast<std::size_t>(users), layout.packets);
  for (int t = solution.horizon; t >= 1; --t) {
    std::int64_t joint = 0;
    for (int u = 0; u < users; ++u) joint = joint * space.size() + space.index(state[u]);
    const int action = solution.policy(joint, t);
    const int row = solution.horizon - t;
    for (int u = 0; u < users; ++u)
      if (slots_per_user(row, u)) state[u] = transition(layout, state[u], action);
  }
  Eigen::VectorXi prefixes(users);
  for (int u = 0; u < users; ++u) prefixes[u] = decoded_prefix(state[u]);
  return prefixes;
}

SimResult monte_carlo(const GopLayout& layout, const TxPolicy& policy, const ChannelSpec& spec,
                      int user, int trials) {
  return run_trials(layout, spec, user, policy.budget(), trials,
                    [&](const SlotVector& slots) { return apply_policy(layout, policy, slots); });
}

SimResult monte_carlo_uncoded(const GopLayout& layout, const TxPolicy& policy,
                              const ChannelSpec& spec, int user, int trials) {
  return run_trials(layout, spec, user, policy.budget(), trials, [&](const SlotVector& slots) {
    return apply_uncoded_policy(layout, policy, slots);
  });
}

SimResult monte_carlo(const GopLayout& layout, const MdpSolution& solution,
                      const ChannelSpec& spec, int user, int trials) {
  return run_trials(layout, spec, user, solution.horizon, trials, [&](const SlotVector& slots) {
    return apply_mdp_policy(layout, solution, slots);
  });
}

std::vector<SimResult> monte_carlo_multi(const GopLayout& layout, const MdpSolution& solution,
                                         const ChannelSpec& spec, int trials) {
  const int users = solution.users;
  if (spec.users() != users)
    detail::throw_contract("monte_carlo_multi: channel spec and solution disagree on users");
  if (trials < 1) detail::throw_contract("monte_carlo_multi: trials must be >= 1");
  for (int u = 0; u < users; ++u) check_user(spec, u);

  Eigen::MatrixXd metrics(trials, users);
  Eigen::MatrixXi decoded(trials, users);
  Eigen::MatrixX<bool> slots(solution.horizon, users);
  for (int k = 0; k < trials; ++k) {
    for (int u = 0; u < users; ++u) {
      const std::uint64_t user_seed = mix_seed(spec.seed, std::uint64_t(u) + 1);
      slots.col(u) = draw_slots(mix_seed(user_seed, std::uint64_t(k) + 1), spec.per_user_pe[u],
                                solution.horizon);
    }
    const Eigen::VectorXi prefixes = apply_mdp_policy_multi(layout, solution, slots);
    for (int u = 0; u < users; ++u) {
      decoded(k, u) = prefixes[u];
      metrics(k, u) = prefixes[u] >= 1 ? layout.weights[prefixes[u] - 1] : 0.0;
    }
  }

  std::vector<SimResult> results;
  results.reserve(static_cast<std::size_t>(users));
  for (int u = 0; u < users; ++u) {
    SimResult r;
    r.trials = trials;
    r.seed = spec.seed;
    r.per_gop_decoded_layers.resize(1, trials);
    r.per_gop_decoded_layers.row(0) = decoded.col(u).transpose();
    r.mean_metric = metrics.col(u).mean();
    if (trials > 1) {
      const double var =
          (metrics.col(u).array() - r.mean_metric).square().sum() / double(trials - 1);
      r.std_error = std::sqrt(var / double(trials));
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace ewrlnc
