// rdpscope: activity detection and side-channel analysis for encrypted RDP
// captures. Subcommands cover the whole pipeline: synth -> extract ->
// transform/rank -> train/evaluate, plus detect for per-window keystroke and
// mouse reports.

#include <cstdint>
#include <string>

#include "CLI11.hpp"
#include "rdpscope/cli.hpp"

namespace {

void add_common_flags(CLI::App* cmd, rdpscope::RunConfig& config) {
  cmd->add_option("--seed", config.seed, "Deterministic seed recorded in every artifact");
}

void add_pcap_flags(CLI::App* cmd, rdpscope::RunConfig& config, std::string& local_ip,
                    int& local_port) {
  cmd->add_option("--local-ip", local_ip, "Local (client) IPv4 address fixing direction")
      ->required();
  cmd->add_option("--local-port", local_port, "Optional local port");
  cmd->add_option("--window-sec", config.window_sec, "Window length in seconds");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encrypted RDP traffic activity detection toolkit"};
  app.require_subcommand(1);

  rdpscope::RunConfig config;
  std::string input, labels, out, local_ip, transport = "tcp";
  int local_port = -1;

  auto* extract = app.add_subcommand("extract", "pcap + labels -> per-window feature CSV");
  extract->add_option("--input", input, "Trace .pcap or corpus directory")->required();
  extract->add_option("--labels", labels, "Label sidecar CSV (single trace)");
  extract->add_option("--out", out, "Output feature CSV")->required();
  add_pcap_flags(extract, config, local_ip, local_port);
  add_common_flags(extract, config);

  auto* transform = app.add_subcommand("transform", "feature CSV -> CSV with derived attributes");
  transform->add_option("--input", input, "Base feature CSV")->required();
  transform->add_option("--out", out, "Augmented CSV (projection manifests written next to it)")
      ->required();
  transform->add_option("--dct-index", config.dct_index, "DCT coefficient index");
  transform->add_option("--components", config.components, "SVD/ICA component count");
  add_common_flags(transform, config);

  auto* rank = app.add_subcommand("rank", "per-class Shapley attribute rankings");
  rank->add_option("--input", input, "Augmented feature CSV")->required();
  rank->add_option("--out", out, "Output directory for rank_<class>.csv")->required();
  add_common_flags(rank, config);

  auto* train = app.add_subcommand("train", "fit the deployable detection pipeline");
  train->add_option("--input", input, "Base feature CSV")->required();
  train->add_option("--out", out, "Pipeline manifest JSON")->required();
  train->add_option("--transport", transport, "tcp or udp profile");
  train->add_option("--dct-index", config.dct_index, "DCT coefficient index");
  train->add_option("--components", config.components, "SVD/ICA component count");
  train->add_option("--select-mass", config.select_mass, "Attribute selection mass");
  train->add_option("--select-cap", config.select_cap, "Attribute selection cap");
  add_common_flags(train, config);

  auto* evaluate = app.add_subcommand("evaluate", "cross-validated pipeline evaluation");
  evaluate->add_option("--input", input, "Base feature CSV")->required();
  evaluate->add_option("--out", out, "Report directory")->required();
  evaluate->add_option("--transport", transport, "tcp or udp profile");
  evaluate->add_option("--folds", config.folds, "Outer cross-validation folds");
  evaluate->add_option("--dct-index", config.dct_index, "DCT coefficient index");
  evaluate->add_option("--components", config.components, "SVD/ICA component count");
  evaluate->add_option("--select-mass", config.select_mass, "Attribute selection mass");
  evaluate->add_option("--select-cap", config.select_cap, "Attribute selection cap");
  add_common_flags(evaluate, config);

  auto* detect = app.add_subcommand("detect", "per-window keystroke/mouse side-channel report");
  detect->add_option("--input", input, "Trace .pcap")->required();
  detect->add_option("--out", out, "Output JSON")->required();
  add_pcap_flags(detect, config, local_ip, local_port);
  add_common_flags(detect, config);

  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic corpus");
  synth->add_option("--input", input, "Profile JSON array");
  synth->add_option("--windows", config.synth_windows,
                    "Generate the activity-mix preset with this many 30s windows");
  synth->add_option("--out", out, "Corpus directory")->required();
  add_common_flags(synth, config);

  CLI11_PARSE(app, argc, argv);

  if (extract->parsed()) config.command = rdpscope::RunConfig::Command::Extract;
  if (transform->parsed()) config.command = rdpscope::RunConfig::Command::Transform;
  if (rank->parsed()) config.command = rdpscope::RunConfig::Command::Rank;
  if (train->parsed()) config.command = rdpscope::RunConfig::Command::Train;
  if (evaluate->parsed()) config.command = rdpscope::RunConfig::Command::Evaluate;
  if (detect->parsed()) config.command = rdpscope::RunConfig::Command::Detect;
  if (synth->parsed()) config.command = rdpscope::RunConfig::Command::Synth;

  config.input = input;
  config.labels = labels;
  config.out = out;
  config.local_ip = local_ip;
  if (local_port >= 0) config.local_port = static_cast<std::uint16_t>(local_port);
  if (transport == "udp") {
    config.transport = rdpscope::TransportProfile::Udp;
  } else if (transport != "tcp") {
    std::fprintf(stderr, "rdpscope: --transport must be tcp or udp\n");
    return 1;
  }

  return rdpscope::run(config);
}
