#pragma once

// Shared helpers for the unit and acceptance suites: packet/window builders
// and a seeded generator of messy random windows.

#include <cstdint>
#include <vector>

#include "rdpscope/capture.hpp"
#include "rdpscope/random.hpp"
#include "rdpscope/windowing.hpp"

namespace testsupport {

inline constexpr std::uint32_t kLocalAddr = 0x0a000002;   // 10.0.0.2
inline constexpr std::uint32_t kRemoteAddr = 0x0a000001;  // 10.0.0.1
inline constexpr std::uint16_t kLocalPort = 50000;
inline constexpr std::uint16_t kRemotePort = 3389;

inline rdpscope::LocalEndpoint local_endpoint() {
  return rdpscope::LocalEndpoint{kLocalAddr, kLocalPort};
}

struct PacketOptions {
  rdpscope::Transport transport = rdpscope::Transport::Tcp;
  std::uint32_t payload = 0;
  std::uint8_t flags = rdpscope::tcpflag::kAck;
  std::uint16_t window = 4096;
  std::uint8_t header_len = 20;
};

inline rdpscope::PacketRecord packet(std::int64_t t_us, rdpscope::Direction dir,
                                     PacketOptions opt = {}) {
  rdpscope::PacketRecord p;
  p.timestamp_us = t_us;
  p.direction = dir;
  p.transport = opt.transport;
  const bool fwd = dir == rdpscope::Direction::Forward;
  p.src = fwd ? rdpscope::Endpoint{kLocalAddr, kLocalPort}
              : rdpscope::Endpoint{kRemoteAddr, kRemotePort};
  p.dst = fwd ? rdpscope::Endpoint{kRemoteAddr, kRemotePort}
              : rdpscope::Endpoint{kLocalAddr, kLocalPort};
  p.payload_len = opt.payload;
  if (opt.transport == rdpscope::Transport::Tcp) {
    p.transport_header_len = opt.header_len;
    p.frame_len = 34 + opt.header_len + opt.payload;
    p.tcp_flags = opt.flags;
    p.tcp_window = opt.window;
  } else {
    p.transport_header_len = 8;
    p.frame_len = 42 + opt.payload;
    p.tcp_flags = 0;
    p.tcp_window = 0;
  }
  return p;
}

// Packet with an explicit on-wire frame length (payload unchanged).
inline rdpscope::PacketRecord sized_packet(std::int64_t t_us, rdpscope::Direction dir,
                                           std::uint32_t frame_len, PacketOptions opt = {}) {
  rdpscope::PacketRecord p = packet(t_us, dir, opt);
  p.frame_len = frame_len;
  if (p.payload_len > frame_len) p.payload_len = 0;
  return p;
}

inline rdpscope::Window window_of(std::vector<rdpscope::PacketRecord> tcp_packets,
                                  std::vector<rdpscope::PacketRecord> udp_packets = {}) {
  rdpscope::Window w;
  w.start_us = 0;
  w.length_us = rdpscope::kDefaultWindowLenUs;
  if (!tcp_packets.empty()) {
    rdpscope::Conversation conv;
    conv.key = {kLocalAddr, kLocalPort, kRemoteAddr, kRemotePort, rdpscope::Transport::Tcp};
    conv.packets = std::move(tcp_packets);
    w.conversations.push_back(std::move(conv));
  }
  if (!udp_packets.empty()) {
    rdpscope::Conversation conv;
    conv.key = {kLocalAddr, kLocalPort, kRemoteAddr, kRemotePort, rdpscope::Transport::Udp};
    conv.packets = std::move(udp_packets);
    w.conversations.push_back(std::move(conv));
  }
  return w;
}

// A deliberately messy window: duplicate timestamps, idle gaps, subflow
// gaps, payload bulks, empty directions sometimes, optional UDP side.
inline rdpscope::Window random_window(rdpscope::Rng& rng) {
  const std::size_t n_tcp = 1 + rng.below(120);
  const bool with_udp = rng.unit() < 0.4;
  const std::size_t n_udp = with_udp ? 1 + rng.below(60) : 0;
  const bool forward_heavy = rng.unit() < 0.2;   // sometimes starve a direction
  const bool backward_only = !forward_heavy && rng.unit() < 0.1;

  std::int64_t t = 1'000'000'000 + static_cast<std::int64_t>(rng.below(1'000'000));
  std::vector<rdpscope::PacketRecord> tcp, udp;
  for (std::size_t i = 0; i < n_tcp; ++i) {
    const double roll = rng.unit();
    if (roll < 0.25) {
      t += 0;  // timestamp tie
    } else if (roll < 0.75) {
      t += static_cast<std::int64_t>(rng.below(2'000));  // dense burst
    } else if (roll < 0.9) {
      t += 100'000 + static_cast<std::int64_t>(rng.below(400'000));
    } else if (roll < 0.97) {
      t += 1'100'000 + static_cast<std::int64_t>(rng.below(2'000'000));  // subflow gap
    } else {
      t += 5'500'000 + static_cast<std::int64_t>(rng.below(4'000'000));  // idle gap
    }
    PacketOptions opt;
    opt.payload = rng.unit() < 0.3 ? 0 : static_cast<std::uint32_t>(rng.below(1460));
    std::uint8_t flags = rdpscope::tcpflag::kAck;
    if (rng.unit() < 0.4) flags |= rdpscope::tcpflag::kPsh;
    if (rng.unit() < 0.05) flags |= rdpscope::tcpflag::kSyn;
    if (rng.unit() < 0.05) flags |= rdpscope::tcpflag::kFin;
    if (rng.unit() < 0.04) flags |= rdpscope::tcpflag::kUrg;
    if (rng.unit() < 0.04) flags |= rdpscope::tcpflag::kRst;
    if (rng.unit() < 0.03) flags |= rdpscope::tcpflag::kEce;
    if (rng.unit() < 0.03) flags |= rdpscope::tcpflag::kCwr;
    opt.flags = flags;
    opt.window = static_cast<std::uint16_t>(rng.below(65536));
    rdpscope::Direction dir;
    if (forward_heavy) {
      dir = rng.unit() < 0.95 ? rdpscope::Direction::Forward : rdpscope::Direction::Backward;
    } else if (backward_only) {
      dir = rdpscope::Direction::Backward;
    } else {
      dir = rng.unit() < 0.5 ? rdpscope::Direction::Forward : rdpscope::Direction::Backward;
    }
    tcp.push_back(packet(t, dir, opt));
  }
  std::int64_t ut = 1'000'000'000 + static_cast<std::int64_t>(rng.below(500'000));
  for (std::size_t i = 0; i < n_udp; ++i) {
    ut += static_cast<std::int64_t>(rng.below(900'000));
    PacketOptions opt;
    opt.transport = rdpscope::Transport::Udp;
    opt.payload = static_cast<std::uint32_t>(rng.below(1400));
    udp.push_back(packet(
        ut, rng.unit() < 0.5 ? rdpscope::Direction::Forward : rdpscope::Direction::Backward,
        opt));
  }
  return window_of(std::move(tcp), std::move(udp));
}

}  // namespace testsupport
