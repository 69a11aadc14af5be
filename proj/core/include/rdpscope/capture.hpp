#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdpscope/errors.hpp"

namespace rdpscope {

enum class Transport : std::uint8_t { Tcp, Udp };
enum class Direction : std::uint8_t { Forward, Backward };

// TCP flag bits, on-wire layout of the flag byte.
namespace tcpflag {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kRst = 0x04;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
inline constexpr std::uint8_t kUrg = 0x20;
inline constexpr std::uint8_t kEce = 0x40;
inline constexpr std::uint8_t kCwr = 0x80;
}  // namespace tcpflag

// IPv4 address + port, address in host byte order.
struct Endpoint {
  std::uint32_t addr = 0;
  std::uint16_t port = 0;
  auto operator<=>(const Endpoint&) const = default;
};

std::uint32_t parse_ipv4(std::string_view dotted);  // throws ConfigError
std::string format_ipv4(std::uint32_t addr);

// The capture-side identity of the RDP client. Direction is fixed by the
// address; the port, when given, only narrows conversation filtering.
struct LocalEndpoint {
  std::uint32_t addr = 0;
  std::optional<std::uint16_t> port;
};

// One captured frame. frame_len is bytes on the wire (pcap orig_len);
// payload_len is bytes above the transport header; transport_header_len is
// the TCP data offset in bytes (8 for UDP) and is retained because header
// length totals are part of the attribute set.
struct PacketRecord {
  std::int64_t timestamp_us = 0;
  Endpoint src;
  Endpoint dst;
  Transport transport = Transport::Tcp;
  std::uint32_t frame_len = 0;
  std::uint32_t payload_len = 0;
  std::uint8_t tcp_flags = 0;  // empty for UDP
  std::uint16_t tcp_window = 0;
  std::uint8_t transport_header_len = 20;
  Direction direction = Direction::Forward;

  bool has_flag(std::uint8_t mask) const { return (tcp_flags & mask) != 0; }
  bool operator==(const PacketRecord&) const = default;
};

// Canonical 5-tuple with the local side first, independent of direction.
struct FiveTuple {
  std::uint32_t local_addr = 0;
  std::uint16_t local_port = 0;
  std::uint32_t remote_addr = 0;
  std::uint16_t remote_port = 0;
  Transport transport = Transport::Tcp;
  auto operator<=>(const FiveTuple&) const = default;
};

struct Conversation {
  FiveTuple key;
  std::vector<PacketRecord> packets;  // time-ordered, capture order on ties
};

// Frames that could not become records, by reason.
struct ParseStats {
  std::uint64_t accepted = 0;
  std::uint64_t skipped_non_ip = 0;
  std::uint64_t skipped_ipv6 = 0;
  std::uint64_t skipped_qinq = 0;
  std::uint64_t skipped_non_transport = 0;
  std::uint64_t skipped_fragment = 0;
  std::uint64_t skipped_short_headers = 0;
  std::uint64_t skipped_foreign = 0;  // neither side matches the local address

  std::uint64_t skipped() const {
    return skipped_non_ip + skipped_ipv6 + skipped_qinq + skipped_non_transport +
           skipped_fragment + skipped_short_headers + skipped_foreign;
  }
};

struct ParseResult {
  std::vector<PacketRecord> records;
  ParseStats stats;
};

// Parses a classic libpcap capture (magic 0xa1b2c3d4 or its byte-swapped
// twin, Ethernet link type) into direction-normalized packet records.
// TCP/UDP-over-IPv4 frames become records in file order; everything else is
// skipped and counted. Throws MalformedCapture / TruncatedRecord.
ParseResult parse_pcap(std::span<const std::uint8_t> bytes, const LocalEndpoint& local);

// Sets record.direction from the local address. Throws UnknownEndpoint when
// neither side matches.
PacketRecord normalize_direction(PacketRecord record, const LocalEndpoint& local);

// Groups direction-normalized records into per-5-tuple conversations,
// ordered by first appearance; packets sorted by timestamp, capture order on
// ties.
std::vector<Conversation> assemble_conversations(std::vector<PacketRecord> records);

// Serializes records back to a classic pcap byte stream (microsecond magic,
// Ethernet framing, synthetic MAC addresses). Reparsing yields the same
// records: timestamps, lengths, flags, windows and directions all survive.
std::vector<std::uint8_t> write_pcap(std::span<const PacketRecord> records);

}  // namespace rdpscope
