#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "ewrlnc/core.hpp"

namespace ewrlnc {

// Default bound on |states| * (horizon + 1); the table of a solve must
// fit under it or the solve refuses with a ResourceLimitError.
inline constexpr std::int64_t kDefaultMdpCap = 5'000'000;

// Indexer for single-user deficit states (d_1, ..., d_L) with
// 0 <= d_l <= k_l. Mixed-radix encoding with d_1 as the most
// significant digit: index = ((d_1*(k_2+1) + d_2)*(k_3+1) + d_3)...
class DeficitSpace {
 public:
  explicit DeficitSpace(const GopLayout& layout);

  std::int64_t size() const { return size_; }
  int layers() const { return static_cast<int>(radix_.size()); }

  std::int64_t index(const Eigen::Ref<const Eigen::VectorXi>& deficits) const;
  Eigen::VectorXi deficits(std::int64_t index) const;

 private:
  Eigen::VectorXi radix_;  // k_l + 1
  std::int64_t size_;
};

// Value function and optimal action tables of a finite-horizon solve.
// Column t holds the stage with t transmissions to go; column 0 of
// `values` is the terminal reward and column 0 of `policy` is unused
// (filled with -1). Actions are window indices 1..L. For multi-user
// solves the state axis enumerates joint states, mixed-radix over the
// single-user indices with user 1 most significant.
struct MdpSolution {
  int horizon = 0;
  int users = 1;
  Eigen::MatrixXd values;        // |S| x (horizon+1)
  Eigen::MatrixXi policy;        // |S| x (horizon+1)
  double eta = 0.0;              // values at the all-deficits start state, stage `horizon`
  Eigen::VectorXd per_user_eta;  // each user's expected terminal reward under the optimal policy
  Eigen::VectorXd pe;            // channel context the tables were built for (size = users)
  Eigen::VectorXd rewards;       // single-user terminal reward vector R_l
  Eigen::VectorXd agg_weights;   // aggregation weights (multi-user; size 1 otherwise)
  bool nonstandard_rewards = false;  // rewards broke the nondecreasing convention
};

// Deterministic part of the state transition under action a_l, assuming
// the coded packet is delivered. A window-l packet reduces the deficit
// of layer l, or of the highest lower layer still in deficit when layer
// l is already complete; a packet whose whole window is complete is
// uninformative and leaves the state unchanged.
Eigen::VectorXi transition(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& state,
                           int window);

// P(next | state, a_window) on a channel with erasure rate pe.
double transition_prob_single(const GopLayout& layout,
                              const Eigen::Ref<const Eigen::VectorXi>& state,
                              const Eigen::Ref<const Eigen::VectorXi>& next, int window, double pe);

// Terminal reward: R_{l*} where l* is the longest fully decoded layer
// prefix, zero when layer 1 is still in deficit.
double terminal_reward_single(const GopLayout& layout,
                              const Eigen::Ref<const Eigen::VectorXi>& state,
                              const Eigen::Ref<const Eigen::VectorXd>& rewards);

// Backward-induction solve of the single-user full-feedback scheme.
// Rewards default to the layout weights so eta matches the analytic
// metric. Ties between actions go to the smallest window index.
MdpSolution solve_single(const GopLayout& layout, double pe, int horizon,
                         std::int64_t cap = kDefaultMdpCap);
MdpSolution solve_single(const GopLayout& layout, double pe, int horizon,
                         const Eigen::Ref<const Eigen::VectorXd>& rewards,
                         std::int64_t cap = kDefaultMdpCap);

// Multi-user solve over joint deficit states. Per-user transitions are
// independent given the action, so joint transition probabilities are
// products; the terminal reward is the weighted sum of the single-user
// rewards. agg_weights must be nonnegative and sum to 1.
MdpSolution solve_multi(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& pes,
                        int horizon, const Eigen::Ref<const Eigen::VectorXd>& agg_weights,
                        std::int64_t cap = kDefaultMdpCap);

// Longest fully decoded layer prefix of a deficit state.
int decoded_prefix(const Eigen::Ref<const Eigen::VectorXi>& state);

}  // namespace ewrlnc
