#include "ewrlnc/packetize.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "ewrlnc/analytic.hpp"

namespace ewrlnc {

namespace {

// 1-based frame indices per layer, most important layer first.
const std::vector<std::vector<int>>& groups_for(int layers) {
  static const std::array<std::vector<std::vector<int>>, 4> kGroups = {{
      {{1, 2, 3, 4, 5, 6, 7, 8}},
      {{2, 4, 6, 8}, {1, 3, 5, 7}},
      {{4, 8}, {2, 6}, {1, 3, 5, 7}},
      {{8}, {4}, {2, 6}, {1, 3, 5, 7}},
  }};
  return kGroups[static_cast<std::size_t>(layers - 1)];
}

}  // namespace

GopLayout layout_for(const GopFrameSizes& frames, int layers, WeightKind kind) {
  if (layers < 1 || layers > 4)
    detail::throw_contract("layout_for: layer count must lie in 1..4, got " +
                           std::to_string(layers));
  if (frames.effective() < 1)
    detail::throw_contract("layout_for: header leaves no payload (packet " +
                           std::to_string(frames.packet_len) + " bytes, header " +
                           std::to_string(frames.header_len) + ")");
  if ((frames.bytes.array() < 0).any())
    detail::throw_contract("layout_for: frame sizes must be nonnegative");

  const auto& groups = groups_for(layers);
  const std::int64_t payload = frames.effective();
  Eigen::VectorXi packets(layers);
  for (int l = 0; l < layers; ++l) {
    std::int64_t group_bytes = 0;
    for (const int frame : groups[static_cast<std::size_t>(l)])
      group_bytes += frames.bytes[frame - 1];
    const std::int64_t count = (group_bytes + payload - 1) / payload;
    if (count < 1)
      detail::throw_contract("layout_for: layer " + std::to_string(l + 1) + " of the " +
                             std::to_string(layers) +
                             "-layer split holds no bytes; a layer needs at least one packet");
    packets[l] = static_cast<int>(count);
  }

  GopLayout layout = make_layout(packets);
  if (kind == WeightKind::Throughput) layout.weights = throughput_weights(layout);
  return layout;
}

int transmission_budget(int frames, double frame_rate, double bitrate, int packet_len_bits) {
  if (frames < 1 || frame_rate <= 0.0 || bitrate <= 0.0 || packet_len_bits < 1)
    detail::throw_contract("transmission_budget: all arguments must be positive");
  return static_cast<int>(
      std::floor(double(frames) * bitrate / (double(packet_len_bits) * frame_rate)));
}

}  // namespace ewrlnc
