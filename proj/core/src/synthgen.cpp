#include "rdpscope/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "rdpscope/errors.hpp"
#include "rdpscope/random.hpp"

namespace rdpscope {

namespace {

constexpr std::int64_t kWindowUs = kDefaultWindowLenUs;
// Events stay inside [start + lead, start + lead + span] so that keystroke
// companions and echoes never spill across a window boundary.
constexpr std::int64_t kLeadUs = 200'000;
constexpr double kSpanS = 29.4;

constexpr std::uint32_t kEthIpTcpOverhead = 54;  // 14 + 20 + 20
constexpr std::uint32_t kEthIpUdpOverhead = 42;  // 14 + 20 + 8

struct TraceBuilder {
  std::vector<PacketRecord> packets;
  Endpoint local{parse_ipv4(std::string(kSynthLocalIp)), kSynthLocalPort};
  Endpoint remote{parse_ipv4(std::string(kSynthRemoteIp)), kSynthRemotePort};

  void tcp(std::int64_t t, Direction dir, std::uint32_t frame_len, std::uint8_t flags,
           std::uint16_t window = 4096, std::uint8_t header_len = 20) {
    PacketRecord p;
    p.timestamp_us = t;
    p.transport = Transport::Tcp;
    p.direction = dir;
    p.src = dir == Direction::Forward ? local : remote;
    p.dst = dir == Direction::Forward ? remote : local;
    p.frame_len = frame_len;
    p.transport_header_len = header_len;
    const std::uint32_t overhead = 34u + header_len;
    p.payload_len = frame_len > overhead ? frame_len - overhead : 0;
    p.tcp_flags = flags;
    p.tcp_window = window;
    packets.push_back(p);
  }

  void udp(std::int64_t t, Direction dir, std::uint32_t frame_len) {
    PacketRecord p;
    p.timestamp_us = t;
    p.transport = Transport::Udp;
    p.direction = dir;
    p.src = dir == Direction::Forward ? local : remote;
    p.dst = dir == Direction::Forward ? remote : local;
    p.frame_len = frame_len;
    p.transport_header_len = 8;
    p.payload_len = frame_len > kEthIpUdpOverhead ? frame_len - kEthIpUdpOverhead : 0;
    packets.push_back(p);
  }

  void handshake(std::int64_t t0) {
    tcp(t0, Direction::Forward, 74, tcpflag::kSyn, 64240, 40);
    tcp(t0 + 150, Direction::Backward, 74, tcpflag::kSyn | tcpflag::kAck, 65535, 40);
    tcp(t0 + 300, Direction::Forward, 54, tcpflag::kAck);
  }

  void keystroke(std::int64_t t, Rng& rng, bool echo) {
    tcp(t, Direction::Forward, 92, tcpflag::kPsh | tcpflag::kAck);
    tcp(t + 300 + static_cast<std::int64_t>(rng.below(400)), Direction::Forward, 92,
        tcpflag::kPsh | tcpflag::kAck);
    if (echo) {
      // Character echo: backward PSH whose payload tracks the screen delta.
      const auto payload = static_cast<std::uint32_t>(49 + rng.below(52));
      tcp(t + 20'000 + static_cast<std::int64_t>(rng.below(40'000)), Direction::Backward,
          kEthIpTcpOverhead + payload, tcpflag::kPsh | tcpflag::kAck);
    }
  }

  void click(std::int64_t t) { tcp(t, Direction::Forward, 97, tcpflag::kPsh | tcpflag::kAck); }
  void move(std::int64_t t) { tcp(t, Direction::Forward, 104, tcpflag::kPsh | tcpflag::kAck); }

  void browse_response(std::int64_t t, Rng& rng) {
    const auto payload = static_cast<std::uint32_t>(300 + rng.below(281));  // frame 354..634
    tcp(t, Direction::Backward, kEthIpTcpOverhead + payload, tcpflag::kPsh | tcpflag::kAck);
  }

  void bulk_frame(std::int64_t t, bool over_udp) {
    if (over_udp) {
      udp(t, Direction::Backward, 1514);
    } else {
      tcp(t, Direction::Backward, 1514, tcpflag::kAck);
    }
  }

  void video_frame(std::int64_t t, Rng& rng, bool over_udp) {
    const std::uint32_t frame = 700 + static_cast<std::uint32_t>(rng.below(501));  // 700..1200
    if (over_udp) {
      udp(t, Direction::Backward, frame);
    } else {
      tcp(t, Direction::Backward, frame, tcpflag::kAck);
    }
  }

  void clipboard_event(std::int64_t t, Rng& rng) {
    tcp(t, Direction::Forward, 85, tcpflag::kPsh | tcpflag::kAck);  // content request
    const int chunks = 2 + static_cast<int>(rng.below(3));
    for (int i = 0; i < chunks; ++i) {
      const auto payload = static_cast<std::uint32_t>(110 + rng.below(151));  // frame 164..314
      tcp(t + 2'000 + i * 1'500, Direction::Backward, kEthIpTcpOverhead + payload,
          tcpflag::kPsh | tcpflag::kAck);
    }
  }

  void keepalive(std::int64_t t) {
    tcp(t, Direction::Forward, 55, tcpflag::kAck);
    tcp(t + 500, Direction::Backward, 66, tcpflag::kAck);
  }
};

// Times for `count` events spread over the usable span of the window at
// `start`, ±20% jitter around the even spacing, order-preserving.
std::vector<std::int64_t> event_times(std::int64_t start, long count, Rng& rng) {
  std::vector<std::int64_t> times;
  if (count <= 0) return times;
  times.reserve(static_cast<std::size_t>(count));
  const double step = kSpanS * 1e6 / static_cast<double>(count);
  for (long i = 0; i < count; ++i) {
    const double jitter = rng.range(-0.2, 0.2) * step;
    const double offset = (static_cast<double>(i) + 0.5) * step + jitter;
    times.push_back(start + kLeadUs + static_cast<std::int64_t>(offset));
  }
  return times;
}

void validate_profile(const ActivityProfile& p) {
  const bool any_activity =
      p.activities[0] || p.activities[1] || p.activities[2] || p.activities[3] || p.activities[4];
  if (!any_activity && !p.idle) {
    throw InvalidProfile("profile has no activity and is not marked idle");
  }
  if (p.duration_s <= 0) throw InvalidProfile("duration must be positive");
  if (p.typing_rate < 0 || p.mouse_move_rate < 0 || p.click_rate < 0 ||
      p.download_throughput < 0 || p.video_burst_period_s < 0 || p.clipboard_event_count < 0) {
    throw InvalidProfile("rates must be non-negative");
  }
  if (p.activities[static_cast<int>(Activity::Download)] && p.download_throughput <= 0) {
    throw InvalidProfile("Download label requires download_throughput > 0");
  }
  if (p.activities[static_cast<int>(Activity::Browsing)] && p.click_rate <= 0) {
    throw InvalidProfile("Browsing label requires click_rate > 0");
  }
  if (p.activities[static_cast<int>(Activity::Notepad)] && p.typing_rate <= 0) {
    throw InvalidProfile("Notepad label requires typing_rate > 0");
  }
  if (p.activities[static_cast<int>(Activity::YouTube)] && p.video_burst_period_s <= 0) {
    throw InvalidProfile("YouTube label requires video_burst_period_s > 0");
  }
  if (p.activities[static_cast<int>(Activity::Clipboard)] && p.clipboard_event_count <= 0) {
    throw InvalidProfile("Clipboard label requires clipboard_event_count > 0");
  }
}

}  // namespace

LocalEndpoint synth_local_endpoint() {
  return LocalEndpoint{parse_ipv4(std::string(kSynthLocalIp)), kSynthLocalPort};
}

SyntheticTrace generate_trace(const ActivityProfile& profile) {
  validate_profile(profile);

  const auto n_windows =
      static_cast<std::size_t>(std::ceil(profile.duration_s / 30.0 - 1e-9));
  Rng rng(profile.seed);
  TraceBuilder trace;
  SyntheticTrace result;
  result.window_count = n_windows;

  trace.handshake(profile.t0_us);

  const bool browsing_source = profile.click_rate > 0;
  for (std::size_t w = 0; w < n_windows; ++w) {
    const std::int64_t start = profile.t0_us + static_cast<std::int64_t>(w) * kWindowUs;
    const double win_s = std::min(30.0, profile.duration_s - static_cast<double>(w) * 30.0);
    Rng wrng = rng.fork(w);

    // Session keepalives make every window observable.
    for (std::int64_t k = 0; k * 1'000'000 < static_cast<std::int64_t>(win_s * 1e6) - kLeadUs;
         ++k) {
      trace.keepalive(start + kLeadUs + k * 1'000'000 + static_cast<std::int64_t>(wrng.below(2000)));
    }

    const auto scaled = [win_s](double rate) {
      return static_cast<long>(std::llround(rate * win_s));
    };

    for (std::int64_t t : event_times(start, scaled(profile.typing_rate), wrng)) {
      trace.keystroke(t, wrng, /*echo=*/true);
      ++result.keystrokes;
    }
    for (std::int64_t t : event_times(start, scaled(profile.mouse_move_rate), wrng)) {
      trace.move(t);
      ++result.mouse_moves;
    }
    long click_index = 0;
    for (std::int64_t t : event_times(start, scaled(profile.click_rate), wrng)) {
      trace.click(t);
      ++result.mouse_clicks;
      if (browsing_source) {
        trace.browse_response(t + 30'000 + static_cast<std::int64_t>(wrng.below(50'000)), wrng);
        if (click_index % 2 == 0) {
          trace.browse_response(t + 90'000 + static_cast<std::int64_t>(wrng.below(50'000)), wrng);
        }
      }
      ++click_index;
    }
    if (profile.download_throughput > 0) {
      const auto frames = static_cast<long>(
          std::ceil(profile.download_throughput * win_s / 1514.0 - 1e-9));
      for (std::int64_t t : event_times(start, frames, wrng)) {
        trace.bulk_frame(t, profile.with_udp);
      }
    }
    if (profile.video_burst_period_s > 0) {
      const auto bursts = static_cast<long>(std::floor(win_s / profile.video_burst_period_s));
      for (std::int64_t t : event_times(start, std::max<long>(bursts, 1), wrng)) {
        for (int f = 0; f < profile.video_burst_frames; ++f) {
          trace.video_frame(t + f * 9'000 + static_cast<std::int64_t>(wrng.below(1'000)), wrng,
                            profile.with_udp);
        }
      }
    }
    for (std::int64_t t : event_times(start, profile.clipboard_event_count, wrng)) {
      trace.clipboard_event(t, wrng);
    }
  }

  std::stable_sort(trace.packets.begin(), trace.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp_us < b.timestamp_us;
                   });
  result.pcap = write_pcap(trace.packets);

  std::vector<std::pair<std::int64_t, LabelBits>> rows;
  rows.reserve(n_windows);
  for (std::size_t w = 0; w < n_windows; ++w) {
    rows.emplace_back(profile.t0_us + static_cast<std::int64_t>(w) * kWindowUs,
                      profile.activities);
  }
  result.label_csv = write_label_csv(rows);
  return result;
}

std::vector<std::uint8_t> generate_scripted_pcap(std::span<const ScriptedEvent> events,
                                                 std::int64_t t0_us, std::uint64_t seed) {
  Rng rng(seed);
  TraceBuilder trace;
  trace.handshake(t0_us);
  for (const ScriptedEvent& e : events) {
    switch (e.kind) {
      case ScriptedEvent::Kind::Keystroke: trace.keystroke(e.t_us, rng, true); break;
      case ScriptedEvent::Kind::Click: trace.click(e.t_us); break;
      case ScriptedEvent::Kind::Move: trace.move(e.t_us); break;
    }
  }
  std::stable_sort(trace.packets.begin(), trace.packets.end(),
                   [](const PacketRecord& a, const PacketRecord& b) {
                     return a.timestamp_us < b.timestamp_us;
                   });
  return write_pcap(trace.packets);
}

void generate_corpus(const std::vector<ActivityProfile>& profiles,
                     const std::filesystem::path& dir) {
  if (profiles.empty()) throw InvalidProfile("corpus needs at least one profile");
  std::filesystem::create_directories(dir);

  std::map<LabelBits, long> combo_windows;
  char stem[32];
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const SyntheticTrace trace = generate_trace(profiles[i]);
    std::snprintf(stem, sizeof(stem), "trace_%04zu", i);
    {
      std::ofstream pcap(dir / (std::string(stem) + ".pcap"), std::ios::binary);
      pcap.write(reinterpret_cast<const char*>(trace.pcap.data()),
                 static_cast<std::streamsize>(trace.pcap.size()));
    }
    {
      std::ofstream labels(dir / (std::string(stem) + ".labels.csv"));
      labels << trace.label_csv;
    }
    combo_windows[profiles[i].activities] += static_cast<long>(trace.window_count);
  }

  std::ofstream manifest(dir / "manifest.csv");
  manifest << "num_samples,download,browsing,notepad,youtube,clipboard\n";
  for (const auto& [bits, count] : combo_windows) {
    manifest << count;
    for (bool b : bits) manifest << ',' << (b ? '1' : '0');
    manifest << '\n';
  }
}

std::vector<ActivityProfile> activity_mix_profiles(int total_windows, std::uint64_t seed) {
  if (total_windows < 1) throw InvalidProfile("total_windows must be >= 1");

  // Pure and mixed label combinations with the collected dataset's
  // proportions (15 combinations; majority pure, mixtures of 2 and 3
  // classes, one 4-class mixture).
  struct Combo {
    LabelBits bits;
    double share;
  };
  static const std::vector<Combo> combos = {
      {{1, 0, 0, 0, 0}, 240.0 / 1456}, {{0, 1, 0, 0, 0}, 240.0 / 1456},
      {{0, 0, 1, 0, 0}, 239.0 / 1456}, {{0, 0, 0, 1, 0}, 243.0 / 1456},
      {{0, 0, 0, 0, 1}, 120.0 / 1456}, {{0, 1, 0, 0, 1}, 74.0 / 1456},
      {{1, 1, 0, 0, 0}, 43.0 / 1456},  {{1, 0, 1, 0, 1}, 25.0 / 1456},
      {{1, 0, 1, 0, 0}, 22.0 / 1456},  {{0, 0, 1, 1, 0}, 62.0 / 1456},
      {{1, 0, 0, 1, 0}, 27.0 / 1456},  {{0, 1, 0, 1, 0}, 63.0 / 1456},
      {{0, 0, 1, 0, 1}, 22.0 / 1456},  {{1, 1, 0, 0, 1}, 15.0 / 1456},
      {{1, 0, 1, 1, 1}, 21.0 / 1456},
  };

  // Largest-remainder apportionment to hit total_windows exactly.
  std::vector<long> counts(combos.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  long assigned = 0;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    const double ideal = combos[i].share * total_windows;
    counts[i] = static_cast<long>(std::floor(ideal));
    assigned += counts[i];
    remainders.emplace_back(ideal - std::floor(ideal), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long i = 0; i < total_windows - assigned; ++i) {
    ++counts[remainders[static_cast<std::size_t>(i) % remainders.size()].second];
  }

  Rng rng(seed);
  std::vector<ActivityProfile> profiles;
  profiles.reserve(static_cast<std::size_t>(total_windows));
  std::uint64_t instance = 0;
  for (std::size_t i = 0; i < combos.size(); ++i) {
    for (long c = 0; c < counts[i]; ++c, ++instance) {
      Rng prng = rng.fork(instance);
      ActivityProfile p;
      p.activities = combos[i].bits;
      p.duration_s = 30.0;
      p.seed = prng.next();
      p.t0_us = kSynthDefaultT0Us;
      if (p.activities[static_cast<int>(Activity::Notepad)]) {
        p.typing_rate = prng.range(2.0, 5.0);
      }
      if (p.activities[static_cast<int>(Activity::Browsing)]) {
        p.mouse_move_rate = prng.range(6.0, 12.0);
        p.click_rate = prng.range(0.5, 1.2);
      }
      if (p.activities[static_cast<int>(Activity::Download)]) {
        p.download_throughput = prng.range(3000.0, 9000.0);
      }
      if (p.activities[static_cast<int>(Activity::YouTube)]) {
        p.video_burst_period_s = prng.range(2.0, 4.0);
        p.video_burst_frames = 12 + static_cast<int>(prng.below(8));
      }
      if (p.activities[static_cast<int>(Activity::Clipboard)]) {
        p.clipboard_event_count = 2 + static_cast<int>(prng.below(4));
      }
      profiles.push_back(p);
    }
  }
  return profiles;
}

}  // namespace rdpscope
