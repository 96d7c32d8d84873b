#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ewrlnc {

// Thrown when a caller breaks a documented precondition (dimension
// mismatches, out-of-range probabilities, malformed layouts).
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a computation would exceed a configured resource cap
// (e.g. the MDP state-stage table size). The message names the
// offending size and the cap.
struct ResourceLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Packet layout of one group of pictures: k_l source packets per layer
// plus the cumulative importance weight c_l of decoding layers 1..l.
// Layer 1 is the most important; window W_l spans layers 1..l.
struct GopLayout {
  Eigen::VectorXi packets;  // k_l, one entry per layer, each >= 1
  Eigen::VectorXd weights;  // c_l in (0,1], nondecreasing, c_L = 1

  int layers() const { return static_cast<int>(packets.size()); }
  int total_packets() const { return packets.sum(); }
};

// Importance weights for temporal layering where decoding layer l
// doubles the usable frame count: c_l = 2^(l-L).
Eigen::VectorXd frame_weights(int layers);

// Builds a layout, attaching frame weights when none are given.
// Throws ContractError on an empty layout, a nonpositive packet
// count, or a weight/packet length mismatch.
GopLayout make_layout(Eigen::VectorXi packets);
GopLayout make_layout(Eigen::VectorXi packets, Eigen::VectorXd weights);

// True iff the layout satisfies every invariant: at least one layer,
// all k_l >= 1, weights of matching length with 0 < c_l <= 1,
// nondecreasing, and c_L = 1. Pure predicate; never throws.
bool validate_weights(const GopLayout& layout);

// Number of coded transmissions scheduled per expanding window.
struct TxPolicy {
  Eigen::VectorXi allocation;  // n_l^t per window

  int windows() const { return static_cast<int>(allocation.size()); }
  int budget() const { return allocation.sum(); }
};

// Packets received per window, componentwise at most the allocation
// when tied to a policy.
using ReceptionVector = Eigen::VectorXi;

// Per-user packet erasure rates plus the seed of the erasure process.
struct ChannelSpec {
  Eigen::VectorXd per_user_pe;  // each in [0,1)
  std::uint64_t seed = 1;

  int users() const { return static_cast<int>(per_user_pe.size()); }
};

// One row of the window-decodability recursion, kept for inspection.
struct LmaxStep {
  int window;     // l
  int base;       // b(l): largest window already known decodable
  int received;   // sum of n_i^r over i in (b, l]
  int required;   // sum of k_i over i in (b, l]
  int decodable;  // D(l): l when the condition holds, else 0
};

// Highest decodable layer for the given per-window reception counts.
//
// Window l decodes when the packets received from windows b+1..l cover
// the source packets of layers b+1..l, where b is the largest window
// already decodable. Receptions beyond a window's span are wasted.
// Returns 0 when no window decodes. Reception counts may exceed the
// per-layer packet counts; they must be nonnegative and of length L.
int l_max(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& received);

// Same recursion, recording one LmaxStep per window.
int l_max(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& received,
          std::vector<LmaxStep>& steps);

namespace detail {
// Message helper for contract checks.
[[noreturn]] void throw_contract(const std::string& what);
}  // namespace detail

}  // namespace ewrlnc
