#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdpscope/windowing.hpp"

namespace rdpscope {

// Keystrokes ride on pairs of forward 92-byte TCP frames; mouse moves and
// clicks on single forward 104- and 97-byte frames. Frame sizes are matched
// exactly by default; the tolerance knob widens the match for future
// protocol revisions.
struct SideChannelOptions {
  std::uint32_t size_tolerance = 0;
  std::int64_t burst_gap_us = 1'000'000;   // inter-keystroke gap splitting bursts
  std::int64_t echo_window_us = 200'000;   // echo attribution window per keystroke
};

struct TypingBurst {
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
  int keystrokes = 0;
  std::vector<std::uint32_t> echo_payload_sizes;  // backward PSH payloads inside the window
  bool uniform_echo_sizes = false;                // >= 2 echoes, all the same size
};

struct KeystrokeReport {
  int frame_count_92 = 0;
  int keystroke_estimate = 0;   // floor(frame_count_92 / 2)
  bool residual_frame = false;  // odd frame count (e.g. a held key)
  std::vector<TypingBurst> bursts;
};

struct MouseEvent {
  std::int64_t timestamp_us = 0;
  enum class Kind { Click, Move } kind = Kind::Click;
};

struct MouseReport {
  int click_packets = 0;  // forward 97-byte frames
  int move_packets = 0;   // forward 104-byte frames
  std::vector<MouseEvent> events;  // time-ordered
};

// Counts only (no burst segmentation). Throws NoTcpConversation.
KeystrokeReport count_keystrokes(const Window& window, const SideChannelOptions& options = {});

// Click/move packet counts plus the ordered event list. Throws
// NoTcpConversation.
MouseReport detect_mouse_events(const Window& window, const SideChannelOptions& options = {});

// Full report: keystroke pairs grouped into bursts, split where the
// inter-keystroke gap exceeds burst_gap_us or a click intervenes; each
// keystroke's backward PSH echo payloads within echo_window_us are recorded
// on its burst. Throws NoTcpConversation.
KeystrokeReport segment_typing_bursts(const Window& window, const SideChannelOptions& options = {});

// Per-window JSON report combining keystroke, burst and mouse findings.
std::string side_channel_report(const Window& window, const SideChannelOptions& options = {});

}  // namespace rdpscope
