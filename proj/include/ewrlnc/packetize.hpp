#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "ewrlnc/core.hpp"

namespace ewrlnc {

inline constexpr int kFramesPerGop = 8;
inline constexpr int kDefaultPacketBytes = 1500;
inline constexpr int kDefaultHeaderBytes = 100;

enum class WeightKind { Frame, Throughput };

// Encoded byte sizes of one 8-frame GOP plus the packet geometry.
// Frame 8 is the anchor the other frames hang off, so it lands in the
// most important layer.
struct GopFrameSizes {
  Eigen::Matrix<std::int64_t, kFramesPerGop, 1> bytes;  // m_1 .. m_8
  int packet_len = kDefaultPacketBytes;
  int header_len = kDefaultHeaderBytes;

  int effective() const { return packet_len - header_len; }
};

// Packs the GOP's bytes into an L-layer layout (L in 1..4) by the
// fixed temporal grouping:
//   L=1: {1..8}
//   L=2: {2,4,6,8}, {1,3,5,7}
//   L=3: {4,8}, {2,6}, {1,3,5,7}
//   L=4: {8}, {4}, {2,6}, {1,3,5,7}
// Each layer holds ceil(group bytes / effective payload) packets.
// A group with zero bytes would produce an empty layer, which is
// rejected with a ContractError.
GopLayout layout_for(const GopFrameSizes& frames, int layers, WeightKind kind);

// Slots available to one GOP: floor(frames * bitrate / (packet_bits *
// frame_rate)). The packet length is in bits here.
int transmission_budget(int frames, double frame_rate, double bitrate, int packet_len_bits);

}  // namespace ewrlnc
