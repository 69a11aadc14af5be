#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rdpscope/capture.hpp"
#include "rdpscope/windowing.hpp"

namespace rdpscope {

// Endpoints used by every generated trace.
inline constexpr std::string_view kSynthLocalIp = "10.1.1.2";
inline constexpr std::string_view kSynthRemoteIp = "10.1.1.1";
inline constexpr std::uint16_t kSynthLocalPort = 49152;
inline constexpr std::uint16_t kSynthRemotePort = 3389;
inline constexpr std::int64_t kSynthDefaultT0Us = 1'700'000'000'000'000;

// Recipe for one labeled synthetic trace. Rates are per second; activity
// labels must be backed by their traffic source (e.g. Notepad needs
// typing_rate > 0), extra sources without the label are allowed.
struct ActivityProfile {
  LabelBits activities{};
  bool idle = false;          // permits an all-zero label vector
  double duration_s = 30.0;
  double typing_rate = 0.0;          // keystrokes/s (two 92-byte frames each)
  double mouse_move_rate = 0.0;      // 104-byte forward frames/s
  double click_rate = 0.0;           // 97-byte forward frames/s
  double download_throughput = 0.0;  // backward bulk bytes/s (1280-2559 frames)
  double video_burst_period_s = 0.0; // backward burst every N seconds
  int video_burst_frames = 16;
  int clipboard_event_count = 0;     // exchanges per 30-second window
  bool with_udp = false;             // carry bulk traffic on a UDP conversation
  std::uint64_t seed = 0;
  std::int64_t t0_us = kSynthDefaultT0Us;
};

// A generated trace plus its scripted ground truth.
struct SyntheticTrace {
  std::vector<std::uint8_t> pcap;
  std::string label_csv;
  long keystrokes = 0;
  long mouse_moves = 0;
  long mouse_clicks = 0;
  std::size_t window_count = 0;
};

// Deterministic generation: identical profiles produce byte-identical pcap
// bytes. Throws InvalidProfile.
SyntheticTrace generate_trace(const ActivityProfile& profile);

// One trace pair per profile written to dir (trace_NNNN.pcap /
// trace_NNNN.labels.csv) plus manifest.csv counting windows per label
// combination. Throws InvalidProfile (empty list included).
void generate_corpus(const std::vector<ActivityProfile>& profiles,
                     const std::filesystem::path& dir);

// Profiles mirroring the pure/mixed combination structure of the collected
// dataset, scaled to total_windows 30-second samples.
std::vector<ActivityProfile> activity_mix_profiles(int total_windows, std::uint64_t seed);

// Low-level scripting hook for side-channel tests: emits the session
// skeleton plus exactly the given key/mouse events.
struct ScriptedEvent {
  std::int64_t t_us = 0;
  enum class Kind { Keystroke, Click, Move } kind = Kind::Keystroke;
};
std::vector<std::uint8_t> generate_scripted_pcap(std::span<const ScriptedEvent> events,
                                                 std::int64_t t0_us, std::uint64_t seed);

// The generator's local endpoint, for parsing generated traces.
LocalEndpoint synth_local_endpoint();

}  // namespace rdpscope
