#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rdpscope/ensemble.hpp"

namespace rdpscope {

// One CLI invocation, fully resolved. Every output artifact embeds the hash
// of this configuration and the seeds that produced it, so identical configs
// reproduce byte-identical outputs.
struct RunConfig {
  enum class Command { Extract, Transform, Rank, Train, Evaluate, Detect, Synth };

  Command command = Command::Extract;
  std::filesystem::path input;   // pcap file, corpus directory, feature CSV, profile JSON
  std::filesystem::path labels;  // label sidecar (single-trace extract)
  std::filesystem::path out;     // output file or directory
  std::string local_ip;
  std::optional<std::uint16_t> local_port;
  TransportProfile transport = TransportProfile::Tcp;
  double window_sec = 30.0;
  int folds = 5;
  std::uint64_t seed = 1;
  int dct_index = 1;
  int components = 20;
  double select_mass = 0.90;
  int select_cap = 20;
  int synth_windows = 0;  // synth --windows (activity-mix preset)
};

std::string config_hash(const RunConfig& config);

// Executes one command; writes artifacts under config.out. Returns 0 on
// success, 1 on validation errors (bad config or malformed inputs), 2 on
// processing errors.
int run(const RunConfig& config);

}  // namespace rdpscope
