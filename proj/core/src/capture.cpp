#include "rdpscope/capture.hpp"

#include <algorithm>
#include <cstring>
#include <map>

namespace rdpscope {

namespace {

constexpr std::uint32_t kMagicNative = 0xa1b2c3d4;   // microsecond timestamps
constexpr std::uint32_t kMagicSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kLinkEthernet = 1;

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherIpv6 = 0x86dd;
constexpr std::uint16_t kEtherVlan = 0x8100;

constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;

std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xff000000u) >> 24) | ((v & 0x00ff0000u) >> 8) |
         ((v & 0x0000ff00u) << 8) | ((v & 0x000000ffu) << 24);
}

struct Cursor {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;

  std::size_t remaining() const { return size - pos; }
  const std::uint8_t* here() const { return data + pos; }
  void skip(std::size_t n) { pos += n; }

  std::uint32_t u32le() {
    std::uint32_t v;
    std::memcpy(&v, data + pos, 4);
    pos += 4;
    return v;
  }
};

std::uint16_t read_be16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

// Decodes one Ethernet frame into a record; returns false with a stats bump
// when the frame is not a parsable TCP/UDP-over-IPv4 unicast.
bool decode_frame(const std::uint8_t* frame, std::size_t len, std::uint32_t orig_len,
                  std::int64_t ts_us, const LocalEndpoint& local, PacketRecord& out,
                  ParseStats& stats) {
  if (len < 14) {
    ++stats.skipped_non_ip;
    return false;
  }
  std::size_t off = 12;
  std::uint16_t ether_type = read_be16(frame + off);
  off += 2;
  if (ether_type == kEtherVlan) {
    // Single 802.1Q tag: 4-byte shift. A second tag (QinQ) is out of scope.
    if (len < off + 4) {
      ++stats.skipped_non_ip;
      return false;
    }
    ether_type = read_be16(frame + off + 2);
    off += 4;
    if (ether_type == kEtherVlan) {
      ++stats.skipped_qinq;
      return false;
    }
  }
  if (ether_type == kEtherIpv6) {
    ++stats.skipped_ipv6;
    return false;
  }
  if (ether_type != kEtherIpv4) {
    ++stats.skipped_non_ip;
    return false;
  }
  if (len < off + 20) {
    ++stats.skipped_short_headers;
    return false;
  }
  const std::uint8_t* ip = frame + off;
  const std::uint8_t version = ip[0] >> 4;
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0f) * 4;
  if (version != 4 || ihl < 20 || len < off + ihl) {
    ++stats.skipped_short_headers;
    return false;
  }
  const std::uint16_t tot_len = read_be16(ip + 2);
  const std::uint16_t frag = read_be16(ip + 6);
  if ((frag & 0x1fff) != 0) {
    // Non-first fragment: no transport header to read. Defragmentation is a
    // non-goal; these frames are counted, not reassembled.
    ++stats.skipped_fragment;
    return false;
  }
  const std::uint8_t proto = ip[9];
  if (proto != kProtoTcp && proto != kProtoUdp) {
    ++stats.skipped_non_transport;
    return false;
  }
  const std::uint32_t src_addr = read_be32(ip + 12);
  const std::uint32_t dst_addr = read_be32(ip + 16);
  if (src_addr != local.addr && dst_addr != local.addr) {
    ++stats.skipped_foreign;
    return false;
  }

  const std::uint8_t* l4 = ip + ihl;
  const std::size_t l4_avail = len - off - ihl;
  if (tot_len < ihl) {
    ++stats.skipped_short_headers;
    return false;
  }

  PacketRecord rec;
  rec.timestamp_us = ts_us;
  rec.frame_len = orig_len;
  rec.src.addr = src_addr;
  rec.dst.addr = dst_addr;

  if (proto == kProtoTcp) {
    if (l4_avail < 20) {
      ++stats.skipped_short_headers;
      return false;
    }
    const std::size_t data_off = static_cast<std::size_t>(l4[12] >> 4) * 4;
    if (data_off < 20 || ihl + data_off > tot_len) {
      ++stats.skipped_short_headers;
      return false;
    }
    rec.transport = Transport::Tcp;
    rec.src.port = read_be16(l4);
    rec.dst.port = read_be16(l4 + 2);
    rec.tcp_flags = l4[13];
    rec.tcp_window = read_be16(l4 + 14);
    rec.transport_header_len = static_cast<std::uint8_t>(data_off);
    rec.payload_len = static_cast<std::uint32_t>(tot_len - ihl - data_off);
  } else {
    if (l4_avail < 8) {
      ++stats.skipped_short_headers;
      return false;
    }
    if (ihl + 8 > tot_len) {
      ++stats.skipped_short_headers;
      return false;
    }
    rec.transport = Transport::Udp;
    rec.src.port = read_be16(l4);
    rec.dst.port = read_be16(l4 + 2);
    const std::uint16_t udp_len = read_be16(l4 + 4);
    rec.transport_header_len = 8;
    rec.payload_len = udp_len >= 8 ? static_cast<std::uint32_t>(udp_len - 8)
                                   : static_cast<std::uint32_t>(tot_len - ihl - 8);
  }
  if (rec.payload_len > rec.frame_len) rec.payload_len = rec.frame_len;

  out = normalize_direction(rec, local);
  ++stats.accepted;
  return true;
}

void put_u16be(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}
void put_u32be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}
void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint16_t ipv4_checksum(const std::uint8_t* hdr, std::size_t len) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < len; i += 2) {
    sum += static_cast<std::uint32_t>((hdr[i] << 8) | hdr[i + 1]);
  }
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum);
}

}  // namespace

std::uint32_t parse_ipv4(std::string_view dotted) {
  std::uint32_t addr = 0;
  int octets = 0;
  std::size_t i = 0;
  while (i < dotted.size()) {
    if (octets == 4) throw ConfigError("invalid IPv4 address: " + std::string(dotted));
    std::uint32_t v = 0;
    std::size_t digits = 0;
    while (i < dotted.size() && dotted[i] >= '0' && dotted[i] <= '9') {
      v = v * 10 + static_cast<std::uint32_t>(dotted[i] - '0');
      ++digits;
      ++i;
    }
    if (digits == 0 || digits > 3 || v > 255) {
      throw ConfigError("invalid IPv4 address: " + std::string(dotted));
    }
    addr = (addr << 8) | v;
    ++octets;
    if (i < dotted.size()) {
      if (dotted[i] != '.') throw ConfigError("invalid IPv4 address: " + std::string(dotted));
      ++i;
      if (i == dotted.size()) throw ConfigError("invalid IPv4 address: " + std::string(dotted));
    }
  }
  if (octets != 4) throw ConfigError("invalid IPv4 address: " + std::string(dotted));
  return addr;
}

std::string format_ipv4(std::uint32_t addr) {
  std::string s;
  for (int shift = 24; shift >= 0; shift -= 8) {
    s += std::to_string((addr >> shift) & 0xff);
    if (shift) s += '.';
  }
  return s;
}

PacketRecord normalize_direction(PacketRecord record, const LocalEndpoint& local) {
  if (record.src.addr == local.addr) {
    record.direction = Direction::Forward;
  } else if (record.dst.addr == local.addr) {
    record.direction = Direction::Backward;
  } else {
    throw UnknownEndpoint("neither " + format_ipv4(record.src.addr) + " nor " +
                          format_ipv4(record.dst.addr) + " matches local " +
                          format_ipv4(local.addr));
  }
  return record;
}

ParseResult parse_pcap(std::span<const std::uint8_t> bytes, const LocalEndpoint& local) {
  if (bytes.size() < 24) {
    throw MalformedCapture("pcap global header requires 24 bytes, got " +
                           std::to_string(bytes.size()));
  }
  Cursor cur{bytes.data(), bytes.size()};
  std::uint32_t magic = cur.u32le();
  bool swapped;
  if (magic == kMagicNative) {
    swapped = false;
  } else if (magic == kMagicSwapped) {
    swapped = true;
  } else {
    throw MalformedCapture("unsupported pcap magic (classic microsecond format required)");
  }
  cur.skip(16);  // version, thiszone, sigfigs, snaplen
  std::uint32_t linktype = cur.u32le();
  if (swapped) linktype = bswap32(linktype);
  if (linktype != kLinkEthernet) {
    throw MalformedCapture("unsupported link type " + std::to_string(linktype) +
                           " (Ethernet required)");
  }

  ParseResult result;
  while (cur.remaining() > 0) {
    if (cur.remaining() < 16) {
      throw TruncatedRecord("record header requires 16 bytes, " +
                            std::to_string(cur.remaining()) + " remain");
    }
    std::uint32_t ts_sec = cur.u32le();
    std::uint32_t ts_usec = cur.u32le();
    std::uint32_t incl_len = cur.u32le();
    std::uint32_t orig_len = cur.u32le();
    if (swapped) {
      ts_sec = bswap32(ts_sec);
      ts_usec = bswap32(ts_usec);
      incl_len = bswap32(incl_len);
      orig_len = bswap32(orig_len);
    }
    if (cur.remaining() < incl_len) {
      throw TruncatedRecord("record claims " + std::to_string(incl_len) + " bytes, " +
                            std::to_string(cur.remaining()) + " remain");
    }
    const std::int64_t ts_us =
        static_cast<std::int64_t>(ts_sec) * 1'000'000 + static_cast<std::int64_t>(ts_usec);
    PacketRecord rec;
    if (decode_frame(cur.here(), incl_len, orig_len, ts_us, local, rec, result.stats)) {
      result.records.push_back(rec);
    }
    cur.skip(incl_len);
  }
  return result;
}

std::vector<Conversation> assemble_conversations(std::vector<PacketRecord> records) {
  std::vector<Conversation> conversations;
  std::map<FiveTuple, std::size_t> index;
  for (PacketRecord& rec : records) {
    FiveTuple key;
    key.transport = rec.transport;
    if (rec.direction == Direction::Forward) {
      key.local_addr = rec.src.addr;
      key.local_port = rec.src.port;
      key.remote_addr = rec.dst.addr;
      key.remote_port = rec.dst.port;
    } else {
      key.local_addr = rec.dst.addr;
      key.local_port = rec.dst.port;
      key.remote_addr = rec.src.addr;
      key.remote_port = rec.src.port;
    }
    auto [it, inserted] = index.try_emplace(key, conversations.size());
    if (inserted) conversations.push_back(Conversation{key, {}});
    conversations[it->second].packets.push_back(std::move(rec));
  }
  for (Conversation& conv : conversations) {
    std::stable_sort(conv.packets.begin(), conv.packets.end(),
                     [](const PacketRecord& a, const PacketRecord& b) {
                       return a.timestamp_us < b.timestamp_us;
                     });
  }
  return conversations;
}

std::vector<std::uint8_t> write_pcap(std::span<const PacketRecord> records) {
  std::vector<std::uint8_t> out;
  out.reserve(24 + records.size() * 80);
  put_u32le(out, kMagicNative);
  put_u32le(out, 0x00040002);  // version 2.4 (minor, major as LE halfwords)
  put_u32le(out, 0);           // thiszone
  put_u32le(out, 0);           // sigfigs
  put_u32le(out, 65535);       // snaplen
  put_u32le(out, kLinkEthernet);

  for (const PacketRecord& rec : records) {
    const std::size_t th = rec.transport == Transport::Tcp ? rec.transport_header_len : 8;
    const std::size_t ip_total = 20 + th + rec.payload_len;
    const std::size_t incl = 14 + ip_total;

    put_u32le(out, static_cast<std::uint32_t>(rec.timestamp_us / 1'000'000));
    put_u32le(out, static_cast<std::uint32_t>(rec.timestamp_us % 1'000'000));
    put_u32le(out, static_cast<std::uint32_t>(incl));
    put_u32le(out, rec.frame_len);

    // Ethernet: synthetic locally-administered MACs, one per direction.
    const std::uint8_t fwd_mac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x01};
    const std::uint8_t bwd_mac[6] = {0x02, 0x00, 0x00, 0x00, 0x00, 0x02};
    const bool fwd = rec.direction == Direction::Forward;
    out.insert(out.end(), fwd ? bwd_mac : fwd_mac, (fwd ? bwd_mac : fwd_mac) + 6);
    out.insert(out.end(), fwd ? fwd_mac : bwd_mac, (fwd ? fwd_mac : bwd_mac) + 6);
    put_u16be(out, kEtherIpv4);

    // IPv4 header, no options.
    const std::size_t ip_start = out.size();
    out.push_back(0x45);
    out.push_back(0);
    put_u16be(out, static_cast<std::uint16_t>(ip_total));
    put_u16be(out, 0);  // identification
    put_u16be(out, 0);  // flags/fragment
    out.push_back(64);  // ttl
    out.push_back(rec.transport == Transport::Tcp ? kProtoTcp : kProtoUdp);
    put_u16be(out, 0);  // checksum placeholder
    put_u32be(out, rec.src.addr);
    put_u32be(out, rec.dst.addr);
    const std::uint16_t csum = ipv4_checksum(out.data() + ip_start, 20);
    out[ip_start + 10] = static_cast<std::uint8_t>(csum >> 8);
    out[ip_start + 11] = static_cast<std::uint8_t>(csum & 0xff);

    if (rec.transport == Transport::Tcp) {
      put_u16be(out, rec.src.port);
      put_u16be(out, rec.dst.port);
      put_u32be(out, 0);  // seq
      put_u32be(out, 0);  // ack
      out.push_back(static_cast<std::uint8_t>((th / 4) << 4));
      out.push_back(rec.tcp_flags);
      put_u16be(out, rec.tcp_window);
      put_u16be(out, 0);  // checksum (not validated on parse)
      put_u16be(out, 0);  // urgent pointer
      out.insert(out.end(), th - 20, 0);  // zero-filled options area
    } else {
      put_u16be(out, rec.src.port);
      put_u16be(out, rec.dst.port);
      put_u16be(out, static_cast<std::uint16_t>(8 + rec.payload_len));
      put_u16be(out, 0);  // checksum
    }
    out.insert(out.end(), rec.payload_len, 0);
  }
  return out;
}

}  // namespace rdpscope
