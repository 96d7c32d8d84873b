#include "ewrlnc/core.hpp"

#include <cmath>
#include <utility>

namespace ewrlnc {

namespace detail {

void throw_contract(const std::string& what) { throw ContractError(what); }

}  // namespace detail

Eigen::VectorXd frame_weights(int layers) {
  if (layers < 1) detail::throw_contract("frame_weights: layers must be >= 1");
  Eigen::VectorXd c(layers);
  for (int l = 0; l < layers; ++l) c[l] = std::ldexp(1.0, l + 1 - layers);
  return c;
}

GopLayout make_layout(Eigen::VectorXi packets) {
  const int layers = static_cast<int>(packets.size());
  if (layers < 1) detail::throw_contract("make_layout: at least one layer required");
  return make_layout(std::move(packets), frame_weights(layers));
}

GopLayout make_layout(Eigen::VectorXi packets, Eigen::VectorXd weights) {
  if (packets.size() < 1) detail::throw_contract("make_layout: at least one layer required");
  if (packets.size() != weights.size())
    detail::throw_contract("make_layout: " + std::to_string(packets.size()) + " layers but " +
                           std::to_string(weights.size()) + " weights");
  if ((packets.array() < 1).any())
    detail::throw_contract("make_layout: every layer needs at least one packet");
  return GopLayout{std::move(packets), std::move(weights)};
}

bool validate_weights(const GopLayout& layout) {
  const auto layers = layout.packets.size();
  if (layers < 1 || layout.weights.size() != layers) return false;
  if ((layout.packets.array() < 1).any()) return false;
  const auto& c = layout.weights;
  if ((c.array() <= 0.0).any() || (c.array() > 1.0).any()) return false;
  for (Eigen::Index l = 1; l < layers; ++l)
    if (c[l] < c[l - 1]) return false;
  return c[layers - 1] == 1.0;
}

namespace {

void check_reception(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& received) {
  if (received.size() != layout.packets.size())
    detail::throw_contract("l_max: layout has " + std::to_string(layout.packets.size()) +
                           " layers but reception vector has " + std::to_string(received.size()));
  if ((received.array() < 0).any())
    detail::throw_contract("l_max: reception counts must be nonnegative");
}

}  // namespace

int l_max(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& received) {
  check_reception(layout, received);
  // Running form of the recursion: (got, need) accumulate receptions and
  // packet counts since the last decodable window; a decode resets both,
  // which discards any surplus from the closed prefix.
  int best = 0;
  int got = 0;
  int need = 0;
  for (int l = 0; l < layout.layers(); ++l) {
    got += received[l];
    need += layout.packets[l];
    if (got >= need) {
      best = l + 1;
      got = 0;
      need = 0;
    }
  }
  return best;
}

int l_max(const GopLayout& layout, const Eigen::Ref<const Eigen::VectorXi>& received,
          std::vector<LmaxStep>& steps) {
  check_reception(layout, received);
  steps.clear();
  int best = 0;
  int got = 0;
  int need = 0;
  for (int l = 0; l < layout.layers(); ++l) {
    got += received[l];
    need += layout.packets[l];
    const bool ok = got >= need;
    steps.push_back(LmaxStep{l + 1, best, got, need, ok ? l + 1 : 0});
    if (ok) {
      best = l + 1;
      got = 0;
      need = 0;
    }
  }
  return best;
}

}  // namespace ewrlnc
