#include "rdpscope/sidechannel.hpp"

#include <algorithm>

#include "json.hpp"
#include "rdpscope/errors.hpp"

namespace rdpscope {

namespace {

constexpr std::uint32_t kKeystrokeFrame = 92;
constexpr std::uint32_t kClickFrame = 97;
constexpr std::uint32_t kMoveFrame = 104;

bool size_matches(std::uint32_t frame_len, std::uint32_t target, std::uint32_t tolerance) {
  const std::uint32_t lo = target > tolerance ? target - tolerance : 0;
  return frame_len >= lo && frame_len <= target + tolerance;
}

const Conversation& tcp_conversation_or_throw(const Window& window) {
  const Conversation* conv = window.tcp_conversation();
  if (conv == nullptr) throw NoTcpConversation("window has no TCP conversation");
  return *conv;
}

}  // namespace

KeystrokeReport count_keystrokes(const Window& window, const SideChannelOptions& options) {
  const Conversation& conv = tcp_conversation_or_throw(window);
  KeystrokeReport report;
  for (const PacketRecord& p : conv.packets) {
    if (p.direction == Direction::Forward &&
        size_matches(p.frame_len, kKeystrokeFrame, options.size_tolerance)) {
      ++report.frame_count_92;
    }
  }
  report.keystroke_estimate = report.frame_count_92 / 2;
  report.residual_frame = report.frame_count_92 % 2 != 0;
  return report;
}

MouseReport detect_mouse_events(const Window& window, const SideChannelOptions& options) {
  const Conversation& conv = tcp_conversation_or_throw(window);
  MouseReport report;
  for (const PacketRecord& p : conv.packets) {
    if (p.direction != Direction::Forward) continue;
    if (size_matches(p.frame_len, kClickFrame, options.size_tolerance)) {
      ++report.click_packets;
      report.events.push_back(MouseEvent{p.timestamp_us, MouseEvent::Kind::Click});
    } else if (size_matches(p.frame_len, kMoveFrame, options.size_tolerance)) {
      ++report.move_packets;
      report.events.push_back(MouseEvent{p.timestamp_us, MouseEvent::Kind::Move});
    }
  }
  std::stable_sort(report.events.begin(), report.events.end(),
                   [](const MouseEvent& a, const MouseEvent& b) {
                     return a.timestamp_us < b.timestamp_us;
                   });
  return report;
}

KeystrokeReport segment_typing_bursts(const Window& window, const SideChannelOptions& options) {
  const Conversation& conv = tcp_conversation_or_throw(window);
  KeystrokeReport report = count_keystrokes(window, options);

  // Keystroke = consecutive pair of 92-byte frames; the pair's time is its
  // first frame. The odd trailing frame (if any) joins no burst.
  std::vector<std::int64_t> key_frames;
  std::vector<std::int64_t> clicks;
  struct Echo {
    std::int64_t t;
    std::uint32_t payload;
  };
  std::vector<Echo> echoes;
  for (const PacketRecord& p : conv.packets) {
    if (p.direction == Direction::Forward) {
      if (size_matches(p.frame_len, kKeystrokeFrame, options.size_tolerance)) {
        key_frames.push_back(p.timestamp_us);
      } else if (size_matches(p.frame_len, kClickFrame, options.size_tolerance)) {
        clicks.push_back(p.timestamp_us);
      }
    } else if (p.has_flag(tcpflag::kPsh) && p.payload_len > 0) {
      echoes.push_back(Echo{p.timestamp_us, p.payload_len});
    }
  }
  std::sort(key_frames.begin(), key_frames.end());
  std::sort(clicks.begin(), clicks.end());
  std::stable_sort(echoes.begin(), echoes.end(),
                   [](const Echo& a, const Echo& b) { return a.t < b.t; });

  std::vector<std::int64_t> keystrokes;
  keystrokes.reserve(key_frames.size() / 2);
  for (std::size_t i = 0; i + 1 < key_frames.size(); i += 2) {
    keystrokes.push_back(key_frames[i]);
  }

  auto click_between = [&](std::int64_t a, std::int64_t b) {
    auto it = std::upper_bound(clicks.begin(), clicks.end(), a);
    return it != clicks.end() && *it < b;
  };

  std::vector<std::vector<std::int64_t>> groups;
  for (std::int64_t t : keystrokes) {
    const bool split = groups.empty() || t - groups.back().back() > options.burst_gap_us ||
                       click_between(groups.back().back(), t);
    if (split) groups.emplace_back();
    groups.back().push_back(t);
  }

  // Each echo belongs to the nearest preceding keystroke, at most once.
  std::vector<std::vector<std::uint32_t>> echo_sizes(keystrokes.size());
  for (const Echo& e : echoes) {
    auto it = std::upper_bound(keystrokes.begin(), keystrokes.end(), e.t);
    if (it == keystrokes.begin()) continue;
    const std::size_t k = static_cast<std::size_t>(it - keystrokes.begin()) - 1;
    if (e.t - keystrokes[k] <= options.echo_window_us) echo_sizes[k].push_back(e.payload);
  }

  std::size_t key_index = 0;
  for (const auto& group : groups) {
    TypingBurst burst;
    burst.start_us = group.front();
    burst.end_us = group.back();
    burst.keystrokes = static_cast<int>(group.size());
    for (std::size_t i = 0; i < group.size(); ++i, ++key_index) {
      for (std::uint32_t size : echo_sizes[key_index]) {
        burst.echo_payload_sizes.push_back(size);
      }
    }
    burst.uniform_echo_sizes =
        burst.echo_payload_sizes.size() >= 2 &&
        std::all_of(burst.echo_payload_sizes.begin(), burst.echo_payload_sizes.end(),
                    [&](std::uint32_t s) { return s == burst.echo_payload_sizes.front(); });
    report.bursts.push_back(std::move(burst));
  }
  return report;
}

std::string side_channel_report(const Window& window, const SideChannelOptions& options) {
  const KeystrokeReport keys = segment_typing_bursts(window, options);
  const MouseReport mouse = detect_mouse_events(window, options);

  nlohmann::json j;
  j["window_start_us"] = window.start_us;
  j["window_length_us"] = window.length_us;
  j["frame_count_92"] = keys.frame_count_92;
  j["keystroke_estimate"] = keys.keystroke_estimate;
  j["residual_frame"] = keys.residual_frame;
  j["click_packets"] = mouse.click_packets;
  j["move_packets"] = mouse.move_packets;
  nlohmann::json bursts = nlohmann::json::array();
  for (const TypingBurst& b : keys.bursts) {
    bursts.push_back(nlohmann::json{{"start_us", b.start_us},
                                    {"end_us", b.end_us},
                                    {"keystrokes", b.keystrokes},
                                    {"echo_payload_sizes", b.echo_payload_sizes},
                                    {"uniform_echo_sizes", b.uniform_echo_sizes}});
  }
  j["bursts"] = std::move(bursts);
  nlohmann::json events = nlohmann::json::array();
  for (const MouseEvent& e : mouse.events) {
    events.push_back(nlohmann::json{
        {"t_us", e.timestamp_us},
        {"kind", e.kind == MouseEvent::Kind::Click ? "click" : "move"}});
  }
  j["mouse_events"] = std::move(events);
  return j.dump(2);
}

}  // namespace rdpscope
