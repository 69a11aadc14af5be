#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "rdpscope/features.hpp"
#include "rdpscope/sidechannel.hpp"
#include "rdpscope/synthgen.hpp"
#include "support.hpp"

using namespace rdpscope;

namespace {

std::vector<Window> windows_of_trace(const SyntheticTrace& trace) {
  const auto parsed = parse_pcap(trace.pcap, synth_local_endpoint());
  auto windows = segment_windows(assemble_conversations(parsed.records));
  return attach_labels(std::move(windows), trace.label_csv);
}

ActivityProfile notepad_profile(double rate, double duration = 30.0, std::uint64_t seed = 1) {
  ActivityProfile p;
  p.activities[static_cast<int>(Activity::Notepad)] = true;
  p.typing_rate = rate;
  p.duration_s = duration;
  p.seed = seed;
  return p;
}

double marker(const FeatureVector& fv, std::string_view name) {
  return fv.values[FeatureSchema::base().index_of(name)];
}

}  // namespace

TEST_CASE("typing at 5/s for 30s emits exactly 300 forward 92-byte frames") {
  const SyntheticTrace trace = generate_trace(notepad_profile(5.0));
  CHECK(trace.keystrokes == 150);
  const auto parsed = parse_pcap(trace.pcap, synth_local_endpoint());
  int frames92 = 0;
  for (const auto& p : parsed.records) {
    if (p.direction == Direction::Forward && p.frame_len == 92) ++frames92;
  }
  CHECK(frames92 == 300);
}

TEST_CASE("identical profiles produce byte-identical pcaps") {
  const SyntheticTrace a = generate_trace(notepad_profile(3.0, 60.0, 99));
  const SyntheticTrace b = generate_trace(notepad_profile(3.0, 60.0, 99));
  CHECK(a.pcap == b.pcap);
  CHECK(a.label_csv == b.label_csv);
  const SyntheticTrace c = generate_trace(notepad_profile(3.0, 60.0, 100));
  CHECK(a.pcap != c.pcap);
}

TEST_CASE("download at 1 MB/s for 30 s fills the large backward bin") {
  ActivityProfile p;
  p.activities[static_cast<int>(Activity::Download)] = true;
  p.download_throughput = 1'000'000;
  p.seed = 3;
  const SyntheticTrace trace = generate_trace(p);
  const auto windows = windows_of_trace(trace);
  REQUIRE(windows.size() == 1);
  const FeatureVector fv = compute_rdp_markers(windows[0]);
  CHECK(marker(fv, "BwdFrame1280-2559") >= 30'000'000.0 / 2559.0);
}

TEST_CASE("invalid profiles are rejected") {
  ActivityProfile empty;
  CHECK_THROWS_AS(generate_trace(empty), InvalidProfile);

  ActivityProfile negative = notepad_profile(3.0);
  negative.download_throughput = -1;
  CHECK_THROWS_AS(generate_trace(negative), InvalidProfile);

  ActivityProfile zero_duration = notepad_profile(3.0);
  zero_duration.duration_s = 0;
  CHECK_THROWS_AS(generate_trace(zero_duration), InvalidProfile);

  // Label without its traffic source.
  ActivityProfile unsourced;
  unsourced.activities[static_cast<int>(Activity::Download)] = true;
  CHECK_THROWS_AS(generate_trace(unsourced), InvalidProfile);

  // Idle profiles are explicitly allowed.
  ActivityProfile idle;
  idle.idle = true;
  const SyntheticTrace trace = generate_trace(idle);
  CHECK(windows_of_trace(trace).size() == 1);
}

TEST_CASE("every generated window matches its profile labels") {
  for (const auto& profile : activity_mix_profiles(24, 5)) {
    const auto windows = windows_of_trace(generate_trace(profile));
    REQUIRE_FALSE(windows.empty());
    for (const Window& w : windows) {
      CHECK(w.labels == profile.activities);
    }
  }
}

TEST_CASE("scripted side-channel counts survive the full parse path") {
  ActivityProfile p = notepad_profile(4.0, 30.0, 21);
  p.mouse_move_rate = 7.0;
  p.click_rate = 1.0;
  const SyntheticTrace trace = generate_trace(p);
  const auto windows = windows_of_trace(trace);
  REQUIRE(windows.size() == 1);

  const KeystrokeReport keys = count_keystrokes(windows[0]);
  const MouseReport mouse = detect_mouse_events(windows[0]);
  CHECK(keys.keystroke_estimate == trace.keystrokes);
  CHECK_FALSE(keys.residual_frame);
  CHECK(mouse.move_packets == trace.mouse_moves);
  CHECK(mouse.click_packets == trace.mouse_clicks);
}

TEST_CASE("class markers have disjoint support on a 200-window corpus") {
  const auto profiles = activity_mix_profiles(200, 314159);
  REQUIRE(profiles.size() == 200);

  const struct {
    Activity activity;
    const char* attribute;
  } markers[] = {
      {Activity::Download, "BwdFrame1280-2559"},
      {Activity::Browsing, "BwdFrame320-639"},
      {Activity::Notepad, "FwdFrame91-93"},
      {Activity::YouTube, "BwdFrame640-1279"},
      {Activity::Clipboard, "BwdFrame160-319"},
  };

  for (const auto& profile : profiles) {
    const auto windows = windows_of_trace(generate_trace(profile));
    for (const Window& w : windows) {
      const FeatureVector fv = compute_rdp_markers(w);
      for (const auto& m : markers) {
        const bool labeled = w.labels[static_cast<int>(m.activity)];
        const double count = marker(fv, m.attribute);
        CAPTURE(m.attribute);
        if (labeled) {
          CHECK(count > 0);
        } else {
          CHECK(count == 0);
        }
      }
    }
  }
}

TEST_CASE("with_udp moves bulk onto a UDP conversation (two conversations)") {
  ActivityProfile p;
  p.activities[static_cast<int>(Activity::Download)] = true;
  p.download_throughput = 50'000;
  p.with_udp = true;
  p.seed = 8;
  const SyntheticTrace trace = generate_trace(p);
  const auto parsed = parse_pcap(trace.pcap, synth_local_endpoint());
  const auto convs = assemble_conversations(parsed.records);
  REQUIRE(convs.size() == 2);
  std::set<Transport> transports;
  for (const auto& c : convs) transports.insert(c.key.transport);
  CHECK(transports == std::set<Transport>{Transport::Tcp, Transport::Udp});

  // The bin counts the frames regardless of transport.
  auto windows = segment_windows(convs);
  REQUIRE(windows.size() == 1);
  CHECK(marker(compute_rdp_markers(windows[0]), "BwdFrame1280-2559") > 0);
}

TEST_CASE("activity mix: exact total and combination structure") {
  const auto profiles = activity_mix_profiles(600, 42);
  CHECK(profiles.size() == 600);

  std::map<LabelBits, int> by_combo;
  std::array<int, 5> positives{};
  for (const auto& p : profiles) {
    ++by_combo[p.activities];
    for (std::size_t c = 0; c < 5; ++c) positives[c] += p.activities[c];
  }
  CHECK(by_combo.size() == 15);
  for (int count : positives) CHECK(count >= 100);  // every class well represented

  CHECK_THROWS_AS(activity_mix_profiles(0, 1), InvalidProfile);
}

TEST_CASE("corpus generation writes traces, sidecars and a manifest") {
  const auto dir = std::filesystem::temp_directory_path() / "rdpscope_corpus_test";
  std::filesystem::remove_all(dir);
  const auto profiles = activity_mix_profiles(15, 7);
  generate_corpus(profiles, dir);

  std::size_t pcaps = 0, sidecars = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".pcap") ++pcaps;
    if (entry.path().filename().string().ends_with(".labels.csv")) ++sidecars;
  }
  CHECK(pcaps == 15);
  CHECK(sidecars == 15);

  std::ifstream manifest(dir / "manifest.csv");
  REQUIRE(manifest.good());
  std::string header;
  std::getline(manifest, header);
  CHECK(header == "num_samples,download,browsing,notepad,youtube,clipboard");
  long total = 0;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    total += std::stol(line.substr(0, line.find(',')));
  }
  CHECK(total == 15);

  CHECK_THROWS_AS(generate_corpus({}, dir), InvalidProfile);
  std::filesystem::remove_all(dir);
}
