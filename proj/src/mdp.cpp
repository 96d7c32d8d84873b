#include "ewrlnc/mdp.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "ewrlnc/analytic.hpp"

namespace ewrlnc {

namespace {

void check_layout(const GopLayout& layout, const char* who) {
  if (layout.layers() < 1 || (layout.packets.array() < 1).any())
    detail::throw_contract(std::string(who) + ": invalid layout");
}

void check_state(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& state,
                 const char* who) {
  if (state.size() != layout.packets.size())
    detail::throw_contract(std::string(who) + ": state length mismatch");
  if ((state.array() < 0).any() || (state.array() > layout.packets.array()).any())
    detail::throw_contract(std::string(who) + ": deficits must lie in [0, k_l]");
}

void check_window(const GopLayout& layout, int window, const char* who) {
  if (window < 1 || window > layout.layers())
    detail::throw_contract(std::string(who) + ": window index " + std::to_string(window) +
                           " outside 1.." + std::to_string(layout.layers()));
}

std::int64_t checked_table_size(std::int64_t states, int users, int horizon, std::int64_t cap) {
  const double entries = std::pow(double(states), double(users)) * double(horizon + 1);
  if (entries > double(cap)) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "MDP table needs %.3g state-stage entries (%lld^%d states, horizon %d), cap is %lld",
                  entries, static_cast<long long>(states), users, horizon,
                  static_cast<long long>(cap));
    throw ResourceLimitError(msg);
  }
  std::int64_t joint = 1;
  for (int u = 0; u < users; ++u) joint *= states;
  return joint;
}

// Digit that a delivered window-`action` packet decrements, or -1 when
// the state is unchanged. `action` is 0-based here.
int decrement_digit(const Eigen::Ref<const Eigen::VectorXi>& state, int action) {
  if (state[action] != 0) return action;
  for (int i = action - 1; i >= 0; --i)
    if (state[i] != 0) return i;
  return -1;
}

}  // namespace

DeficitSpace::DeficitSpace(const GopLayout& layout) {
  check_layout(layout, "DeficitSpace");
  radix_ = layout.packets.array() + 1;
  size_ = 1;
  for (int l = 0; l < radix_.size(); ++l) size_ *= radix_[l];
}

std::int64_t DeficitSpace::index(const Eigen::Ref<const Eigen::VectorXi>& deficits) const {
  if (deficits.size() != radix_.size())
    detail::throw_contract("DeficitSpace::index: state length mismatch");
  std::int64_t idx = 0;
  for (int l = 0; l < radix_.size(); ++l) {
    if (deficits[l] < 0 || deficits[l] >= radix_[l])
      detail::throw_contract("DeficitSpace::index: deficit out of range");
    idx = idx * radix_[l] + deficits[l];
  }
  return idx;
}

Eigen::VectorXi DeficitSpace::deficits(std::int64_t index) const {
  if (index < 0 || index >= size_)
    detail::throw_contract("DeficitSpace::deficits: index out of range");
  Eigen::VectorXi d(radix_.size());
  for (int l = static_cast<int>(radix_.size()) - 1; l >= 0; --l) {
    d[l] = static_cast<int>(index % radix_[l]);
    index /= radix_[l];
  }
  return d;
}

Eigen::VectorXi transition(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& state,
                           int window) {
  check_window(layout, window, "transition");
  check_state(layout, state, "transition");
  Eigen::VectorXi next = state;
  const int digit = decrement_digit(state, window - 1);
  if (digit >= 0) --next[digit];
  return next;
}

double transition_prob_single(const GopLayout& layout,
                              const Eigen::Ref<const Eigen::VectorXi>& state,
                              const Eigen::Ref<const Eigen::VectorXi>& next, int window,
                              double pe) {
  detail::check_pe(pe);
  check_state(layout, next, "transition_prob_single");
  const Eigen::VectorXi reached = transition(layout, state, window);
  double prob = 0.0;
  if (next == reached) prob += 1.0 - pe;
  if (next == state) prob += pe;
  return prob;
}

int decoded_prefix(const Eigen::Ref<const Eigen::VectorXi>& state) {
  int prefix = 0;
  for (int l = 0; l < state.size(); ++l) {
    if (state[l] != 0) break;
    ++prefix;
  }
  return prefix;
}

double terminal_reward_single(const GopLayout& layout,
                              const Eigen::Ref<const Eigen::VectorXi>& state,
                              const Eigen::Ref<const Eigen::VectorXd>& rewards) {
  check_state(layout, state, "terminal_reward_single");
  if (rewards.size() != layout.packets.size())
    detail::throw_contract("terminal_reward_single: reward vector length mismatch");
  const int prefix = decoded_prefix(state);
  return prefix >= 1 ? rewards[prefix - 1] : 0.0;
}

MdpSolution solve_single(const GopLayout& layout, double pe, int horizon, std::int64_t cap) {
  return solve_single(layout, pe, horizon, layout.weights, cap);
}

MdpSolution solve_single(const GopLayout& layout, double pe, int horizon,
                         const Eigen::Ref<const Eigen::VectorXd>& rewards, std::int64_t cap) {
  check_layout(layout, "solve_single");
  detail::check_pe(pe);
  if (horizon < 0) detail::throw_contract("solve_single: horizon must be >= 0");
  if (rewards.size() != layout.packets.size())
    detail::throw_contract("solve_single: reward vector length mismatch");

  const DeficitSpace space(layout);
  const std::int64_t states = checked_table_size(space.size(), 1, horizon, cap);
  const int layers = layout.layers();

  // Successor index per (state, action); erasure keeps the state.
  // The stride of digit l is the product of the radices right of it.
  Eigen::VectorX<std::int64_t> strides(layers);
  {
    std::int64_t stride = 1;
    for (int l = layers - 1; l >= 0; --l) {
      strides[l] = stride;
      stride *= layout.packets[l] + 1;
    }
  }
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> succ(states, layers);
  Eigen::VectorXd terminal(states);
  for (std::int64_t s = 0; s < states; ++s) {
    const Eigen::VectorXi d = space.deficits(s);
    terminal[s] = terminal_reward_single(layout, d, rewards);
    for (int a = 0; a < layers; ++a) {
      const int digit = decrement_digit(d, a);
      succ(s, a) = digit >= 0 ? s - strides[digit] : s;
    }
  }

  MdpSolution sol;
  sol.horizon = horizon;
  sol.users = 1;
  sol.values.resize(states, horizon + 1);
  sol.policy = Eigen::MatrixXi::Constant(states, horizon + 1, -1);
  sol.values.col(0) = terminal;
  const double q = 1.0 - pe;
  for (int t = 1; t <= horizon; ++t) {
    for (std::int64_t s = 0; s < states; ++s) {
      double best = -1.0;
      int best_a = 0;
      const double stay = pe * sol.values(s, t - 1);
      for (int a = 0; a < layers; ++a) {
        const double v = q * sol.values(succ(s, a), t - 1) + stay;
        if (v > best) {
          best = v;
          best_a = a;
        }
      }
      sol.values(s, t) = best;
      sol.policy(s, t) = best_a + 1;
    }
  }
  sol.eta = sol.values(states - 1, horizon);  // all-deficits state has the last index
  sol.per_user_eta = Eigen::VectorXd::Constant(1, sol.eta);
  sol.pe = Eigen::VectorXd::Constant(1, pe);
  sol.rewards = rewards;
  sol.agg_weights = Eigen::VectorXd::Ones(1);
  for (int l = 1; l < layers; ++l)
    if (rewards[l] < rewards[l - 1]) sol.nonstandard_rewards = true;
  return sol;
}

MdpSolution solve_multi(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& pes,
                        int horizon, const Eigen::Ref<const Eigen::VectorXd>& agg_weights,
                        std::int64_t cap) {
  check_layout(layout, "solve_multi");
  const int users = static_cast<int>(pes.size());
  if (users < 1) detail::throw_contract("solve_multi: at least one user required");
  for (int u = 0; u < users; ++u) detail::check_pe(pes[u]);
  if (horizon < 0) detail::throw_contract("solve_multi: horizon must be >= 0");
  if (agg_weights.size() != users)
    detail::throw_contract("solve_multi: aggregation weights must match the user count");
  if ((agg_weights.array() < 0.0).any() || std::abs(agg_weights.sum() - 1.0) > 1e-9)
    detail::throw_contract("solve_multi: aggregation weights must be nonnegative and sum to 1");

  const DeficitSpace space(layout);
  const std::int64_t joint_states = checked_table_size(space.size(), users, horizon, cap);
  const std::int64_t single = space.size();
  const int layers = layout.layers();

  // Single-user pieces, combined on the fly per joint state.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> succ(single, layers);
  Eigen::VectorXd terminal_single(single);
  {
    Eigen::VectorX<std::int64_t> strides(layers);
    std::int64_t stride = 1;
    for (int l = layers - 1; l >= 0; --l) {
      strides[l] = stride;
      stride *= layout.packets[l] + 1;
    }
    for (std::int64_t s = 0; s < single; ++s) {
      const Eigen::VectorXi d = space.deficits(s);
      terminal_single[s] = terminal_reward_single(layout, d, layout.weights);
      for (int a = 0; a < layers; ++a) {
        const int digit = decrement_digit(d, a);
        succ(s, a) = digit >= 0 ? s - strides[digit] : s;
      }
    }
  }

  // Joint index = sum_u idx_u * single^(users-1-u).
  Eigen::VectorX<std::int64_t> user_stride(users);
  {
    std::int64_t stride = 1;
    for (int u = users - 1; u >= 0; --u) {
      user_stride[u] = stride;
      stride *= single;
    }
  }

  MdpSolution sol;
  sol.horizon = horizon;
  sol.users = users;
  sol.values.resize(joint_states, horizon + 1);
  sol.policy = Eigen::MatrixXi::Constant(joint_states, horizon + 1, -1);

  std::vector<std::int64_t> idx(users);
  const auto decode_joint = [&](std::int64_t s) {
    for (int u = 0; u < users; ++u) {
      idx[u] = s / user_stride[u];
      s -= idx[u] * user_stride[u];
    }
  };

  for (std::int64_t s = 0; s < joint_states; ++s) {
    decode_joint(s);
    double g = 0.0;
    for (int u = 0; u < users; ++u) g += agg_weights[u] * terminal_single[idx[u]];
    sol.values(s, 0) = g;
  }

  const int subsets = 1 << users;
  std::vector<std::int64_t> go_offset(users);
  std::vector<double> p_go(users), p_stay(users);
  for (int u = 0; u < users; ++u) {
    p_go[u] = 1.0 - pes[u];
    p_stay[u] = pes[u];
  }

  // Expected next value of one action from joint state s: sum over
  // delivery subsets of the product of per-user branch probabilities.
  const auto action_value = [&](const Eigen::VectorXd& prev, std::int64_t s, int a) {
    for (int u = 0; u < users; ++u)
      go_offset[u] = (succ(idx[u], a) - idx[u]) * user_stride[u];
    double total = 0.0;
    for (int mask = 0; mask < subsets; ++mask) {
      double p = 1.0;
      std::int64_t target = s;
      for (int u = 0; u < users; ++u) {
        if (mask & (1 << u)) {
          p *= p_go[u];
          target += go_offset[u];
        } else {
          p *= p_stay[u];
        }
      }
      total += p * prev[target];
    }
    return total;
  };

  for (int t = 1; t <= horizon; ++t) {
    const Eigen::VectorXd prev = sol.values.col(t - 1);
    for (std::int64_t s = 0; s < joint_states; ++s) {
      decode_joint(s);
      double best = -1.0;
      int best_a = 0;
      for (int a = 0; a < layers; ++a) {
        const double v = action_value(prev, s, a);
        if (v > best) {
          best = v;
          best_a = a;
        }
      }
      sol.values(s, t) = best;
      sol.policy(s, t) = best_a + 1;
    }
  }

  // Per-user expected terminal rewards under the fixed optimal policy.
  Eigen::MatrixXd user_prev(joint_states, users);
  for (std::int64_t s = 0; s < joint_states; ++s) {
    decode_joint(s);
    for (int u = 0; u < users; ++u) user_prev(s, u) = terminal_single[idx[u]];
  }
  Eigen::MatrixXd user_next(joint_states, users);
  Eigen::VectorXd acc(users);
  for (int t = 1; t <= horizon; ++t) {
    for (std::int64_t s = 0; s < joint_states; ++s) {
      decode_joint(s);
      const int a = sol.policy(s, t) - 1;
      for (int u = 0; u < users; ++u)
        go_offset[u] = (succ(idx[u], a) - idx[u]) * user_stride[u];
      acc.setZero();
      for (int mask = 0; mask < subsets; ++mask) {
        double p = 1.0;
        std::int64_t target = s;
        for (int u = 0; u < users; ++u) {
          if (mask & (1 << u)) {
            p *= p_go[u];
            target += go_offset[u];
          } else {
            p *= p_stay[u];
          }
        }
        acc += p * user_prev.row(target).transpose();
      }
      user_next.row(s) = acc.transpose();
    }
    user_prev.swap(user_next);
  }

  sol.eta = sol.values(joint_states - 1, horizon);
  sol.per_user_eta = user_prev.row(joint_states - 1).transpose();
  sol.pe = pes;
  sol.rewards = layout.weights;
  sol.agg_weights = agg_weights;
  return sol;
}

}  // namespace ewrlnc
