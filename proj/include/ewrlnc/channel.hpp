#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

#include "ewrlnc/core.hpp"
#include "ewrlnc/mdp.hpp"

namespace ewrlnc {

using SlotVector = Eigen::Array<bool, Eigen::Dynamic, 1>;  // true = delivered

// Realized delivery outcome of a run of transmission slots for one user.
struct ErasurePattern {
  SlotVector slots;
  std::uint64_t seed = 0;  // root seed the pattern was derived from
  int user = 0;
};

// splitmix64 step, used to derive independent substreams from one root
// seed (per user, per trial). Stable across platforms.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Name of the slot generator recorded in results: a mt19937_64 stream
// mapped to [0,1) with 53-bit resolution, one draw per slot.
inline constexpr const char* kGeneratorName = "mt19937_64-u53";

// I.i.d. Bernoulli(1 - pe) slots for the given user. Identical
// (seed, user, slots) input reproduces the pattern bit for bit.
ErasurePattern generate_pattern(const ChannelSpec& spec, int user, Eigen::Index slots);

// Replays an open-loop policy against one GOP's worth of slots: all
// window-1 packets first, then window 2, and so on. Returns the highest
// decodable layer. The slice must hold exactly policy.budget() slots.
int apply_policy(const GopLayout& layout, const TxPolicy& policy,
                 const Eigen::Ref<const SlotVector>& slots);

// Replays the uncoded round-robin baseline: layer l's block of slots
// cycles through its k_l packets. A layer counts only when it and all
// layers below it are completely delivered; returns that prefix length.
int apply_uncoded_policy(const GopLayout& layout, const TxPolicy& policy,
                         const Eigen::Ref<const SlotVector>& slots);

// Replays a solved full-feedback policy: at each stage the tabled
// action for the current deficit state is transmitted, and a delivered
// slot advances the state. Returns the decoded layer prefix. The slice
// must hold exactly solution.horizon slots (single-user solutions only).
int apply_mdp_policy(const GopLayout& layout, const MdpSolution& solution,
                     const Eigen::Ref<const SlotVector>& slots);

// Multi-user variant: one slot slice per user, all of length
// solution.horizon. The sender action depends on the joint state; each
// user's reception advances their own deficits. Returns the per-user
// decoded layer prefixes.
Eigen::VectorXi apply_mdp_policy_multi(const GopLayout& layout, const MdpSolution& solution,
                                       const Eigen::MatrixX<bool>& slots_per_user);

// Aggregated outcome of repeated randomized replays.
struct SimResult {
  Eigen::MatrixXi per_gop_decoded_layers;  // one row per GOP, one column per trial
  double mean_metric = 0.0;                // average of c_{l*} with c_0 = 0
  double std_error = 0.0;                  // standard error of the mean
  std::uint64_t seed = 0;
  int trials = 0;
  std::string generator = kGeneratorName;
};

// Monte-Carlo evaluation of one GOP under a feedback-free RLNC policy,
// the uncoded baseline, or a solved full-feedback policy. Trial k of
// `user` draws its slots from the substream mix(mix(seed, user), k), so
// results are reproducible and trials are independent.
SimResult monte_carlo(const GopLayout& layout, const TxPolicy& policy, const ChannelSpec& spec,
                      int user, int trials);
SimResult monte_carlo_uncoded(const GopLayout& layout, const TxPolicy& policy,
                              const ChannelSpec& spec, int user, int trials);
SimResult monte_carlo(const GopLayout& layout, const MdpSolution& solution,
                      const ChannelSpec& spec, int user, int trials);

// Joint multi-user replay of a solved full-feedback policy; returns one
// SimResult per user, with slots drawn from the same per-user
// substreams as the single-user overloads.
std::vector<SimResult> monte_carlo_multi(const GopLayout& layout, const MdpSolution& solution,
                                         const ChannelSpec& spec, int trials);

}  // namespace ewrlnc
