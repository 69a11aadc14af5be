#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rdpscope/capture.hpp"

namespace rdpscope {

// Activity classes in their fixed order; every 5-entry label vector in the
// toolkit follows it.
enum class Activity : int { Download = 0, Browsing, Notepad, YouTube, Clipboard };

inline constexpr std::array<std::string_view, 5> kActivityNames = {
    "download", "browsing", "notepad", "youtube", "clipboard"};

using LabelBits = std::array<bool, 5>;

inline constexpr std::int64_t kDefaultWindowLenUs = 30'000'000;

// A 30-second (by default) half-open observation [start, start + length).
struct Window {
  std::int64_t start_us = 0;
  std::int64_t length_us = kDefaultWindowLenUs;
  bool partial = false;  // capture ended before the window was fully covered
  std::vector<Conversation> conversations;
  LabelBits labels{};
  bool labeled = false;

  std::size_t packet_count() const {
    std::size_t n = 0;
    for (const Conversation& c : conversations) n += c.packets.size();
    return n;
  }

  // First TCP conversation, or nullptr.
  const Conversation* tcp_conversation() const {
    for (const Conversation& c : conversations) {
      if (c.key.transport == Transport::Tcp) return &c;
    }
    return nullptr;
  }
};

enum class WindowOrigin { FirstPacket, Absolute };

struct WindowingOptions {
  std::int64_t window_len_us = kDefaultWindowLenUs;
  WindowOrigin origin = WindowOrigin::FirstPacket;
  // Used when origin == Absolute. With FirstPacket the origin is the first
  // packet timestamp rounded down to the second.
  std::int64_t origin_us = 0;
};

// Tiles [origin, last packet] with half-open windows of fixed length.
// Packets before the origin are dropped; empty windows are omitted; the
// trailing window is flagged partial when the capture ends inside it.
std::vector<Window> segment_windows(const std::vector<Conversation>& conversations,
                                    const WindowingOptions& options = {});

inline constexpr std::string_view kLabelCsvHeader =
    "start_us,download,browsing,notepad,youtube,clipboard";

// Attaches the 5-bit label vector to each window from the sidecar CSV
// (header above, one row per window start). Throws MissingLabel when a
// window start has no row, LabelSchemaError on a malformed file.
std::vector<Window> attach_labels(std::vector<Window> windows, std::string_view label_csv);

// Serializes label rows in the sidecar format.
std::string write_label_csv(const std::vector<std::pair<std::int64_t, LabelBits>>& rows);

}  // namespace rdpscope
