#include "rdpscope/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "rdpscope/pipeline.hpp"
#include "rdpscope/random.hpp"
#include "rdpscope/sidechannel.hpp"
#include "rdpscope/synthgen.hpp"

namespace rdpscope {

namespace {

std::string command_name(RunConfig::Command c) {
  switch (c) {
    case RunConfig::Command::Extract: return "extract";
    case RunConfig::Command::Transform: return "transform";
    case RunConfig::Command::Rank: return "rank";
    case RunConfig::Command::Train: return "train";
    case RunConfig::Command::Evaluate: return "evaluate";
    case RunConfig::Command::Detect: return "detect";
    case RunConfig::Command::Synth: return "synth";
  }
  return "?";
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::uint8_t> read_binary(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  return std::vector<std::uint8_t>(text.begin(), text.end());
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

LocalEndpoint local_endpoint(const RunConfig& config) {
  if (config.local_ip.empty()) {
    throw ConfigError("--local-ip is required for this command");
  }
  LocalEndpoint local;
  local.addr = parse_ipv4(config.local_ip);
  local.port = config.local_port;
  return local;
}

std::vector<std::pair<std::string, std::string>> meta_lines(const RunConfig& config) {
  return {{"config_hash", config_hash(config)}, {"seed", std::to_string(config.seed)}};
}

// Windows of one trace, labeled from its sidecar.
std::vector<Window> trace_windows(const std::filesystem::path& pcap_path,
                                  const std::filesystem::path& label_path,
                                  const LocalEndpoint& local, double window_sec) {
  const auto bytes = read_binary(pcap_path);
  ParseResult parsed = parse_pcap(bytes, local);
  auto conversations = assemble_conversations(std::move(parsed.records));
  WindowingOptions wopt;
  wopt.window_len_us = static_cast<std::int64_t>(window_sec * 1e6);
  std::vector<Window> windows = segment_windows(conversations, wopt);
  if (!label_path.empty()) {
    if (!std::filesystem::exists(label_path)) {
      throw MissingLabel("label file not found: " + label_path.string());
    }
    windows = attach_labels(std::move(windows), read_file(label_path));
  }
  return windows;
}

int run_extract(const RunConfig& config) {
  const LocalEndpoint local = local_endpoint(config);
  std::vector<FeatureVector> vectors;

  if (std::filesystem::is_directory(config.input)) {
    // Corpus directory: every trace_*.pcap with its .labels.csv sidecar.
    std::vector<std::filesystem::path> pcaps;
    for (const auto& entry : std::filesystem::directory_iterator(config.input)) {
      if (entry.path().extension() == ".pcap") pcaps.push_back(entry.path());
    }
    std::sort(pcaps.begin(), pcaps.end());
    if (pcaps.empty()) throw ConfigError("no .pcap files in " + config.input.string());
    for (const auto& pcap_path : pcaps) {
      std::filesystem::path label_path = pcap_path;
      label_path.replace_extension(".labels.csv");
      for (const Window& w : trace_windows(pcap_path, label_path, local, config.window_sec)) {
        vectors.push_back(compute_base_features(w));
      }
    }
  } else {
    if (!std::filesystem::exists(config.input)) {
      throw ConfigError("input not found: " + config.input.string());
    }
    if (config.labels.empty()) {
      throw MissingLabel("extract requires --labels for a single trace");
    }
    for (const Window& w : trace_windows(config.input, config.labels, local, config.window_sec)) {
      vectors.push_back(compute_base_features(w));
    }
  }

  write_file(config.out, export_features(vectors, FeatureSchema::base(), meta_lines(config)));
  return 0;
}

int run_transform(const RunConfig& config) {
  const FeatureTable base = read_feature_csv(read_file(config.input));
  TransformOptions options;
  options.dct_index = config.dct_index;
  options.components = config.components;
  options.seed = config.seed;
  const TransformSet transforms = fit_transforms(base, options);
  const FeatureTable full = apply_transforms(transforms, base);

  write_file(config.out, export_features(full.rows, full.schema, meta_lines(config)));
  std::filesystem::path svd_path = config.out;
  svd_path += ".svd.json";
  std::filesystem::path ica_path = config.out;
  ica_path += ".ica.json";
  write_file(svd_path, transforms.svd.to_json());
  write_file(ica_path, transforms.ica.to_json());
  return 0;
}

int run_rank(const RunConfig& config) {
  const FeatureTable table = read_feature_csv(read_file(config.input));
  Rows rows;
  rows.reserve(table.rows.size());
  for (const FeatureVector& fv : table.rows) rows.push_back(fv.values);

  Rng rng(config.seed);
  for (std::size_t cls = 0; cls < 5; ++cls) {
    std::vector<bool> y;
    y.reserve(table.rows.size());
    for (const FeatureVector& fv : table.rows) y.push_back(fv.labels[cls]);

    ModelSpec backend = ModelSpec::random_forest(48, 0, rng.next());
    const auto model = train(backend, rows, y, table.schema.names());
    ShapleyOptions options;
    options.samples_per_row = 24;
    options.max_background = 32;
    options.max_targets = 128;
    options.seed = rng.next();
    const AttributionReport report =
        shapley_rank(*model, rows, rows, options, std::string(kActivityNames[cls]));

    std::filesystem::path path = config.out;
    std::filesystem::create_directories(path);
    write_file(path / ("rank_" + std::string(kActivityNames[cls]) + ".csv"), report.to_csv());
  }
  return 0;
}

PipelineOptions pipeline_options(const RunConfig& config) {
  PipelineOptions options;
  options.profile = config.transport;
  options.ensemble_folds = config.folds;
  options.seed = config.seed;
  options.transforms.dct_index = config.dct_index;
  options.transforms.components = config.components;
  options.select_mass = config.select_mass;
  options.select_cap = static_cast<std::size_t>(config.select_cap);
  return options;
}

int run_train(const RunConfig& config) {
  const FeatureTable base = read_feature_csv(read_file(config.input));
  const TrainedPipeline pipeline = train_pipeline(base, pipeline_options(config));
  write_file(config.out, pipeline.to_json(config_hash(config)));
  return 0;
}

int run_evaluate(const RunConfig& config) {
  const FeatureTable base = read_feature_csv(read_file(config.input));
  const EvaluationReport report = evaluate_dataset(base, pipeline_options(config));

  std::filesystem::create_directories(config.out);
  write_file(config.out / "report.txt", report.render_text());
  write_file(config.out / "report.json", report.to_json(config_hash(config)));
  std::cout << report.render_text();
  return 0;
}

int run_detect(const RunConfig& config) {
  const LocalEndpoint local = local_endpoint(config);
  const std::vector<Window> windows =
      trace_windows(config.input, {}, local, config.window_sec);

  nlohmann::json j;
  j["format"] = "rdp-sidechannel-1";
  j["config_hash"] = config_hash(config);
  j["seed"] = config.seed;
  nlohmann::json reports = nlohmann::json::array();
  for (const Window& w : windows) {
    if (w.tcp_conversation() == nullptr) continue;
    reports.push_back(nlohmann::json::parse(side_channel_report(w)));
  }
  j["windows"] = std::move(reports);
  write_file(config.out, j.dump(2));
  return 0;
}

ActivityProfile profile_from_json(const nlohmann::json& j) {
  ActivityProfile p;
  if (j.contains("activities")) {
    const auto names = j.at("activities").get<std::vector<std::string>>();
    for (const std::string& n : names) {
      bool known = false;
      for (std::size_t c = 0; c < 5; ++c) {
        if (n == kActivityNames[c]) {
          p.activities[c] = true;
          known = true;
        }
      }
      if (!known) throw InvalidProfile("unknown activity: " + n);
    }
  }
  p.idle = j.value("idle", false);
  p.duration_s = j.value("duration_s", 30.0);
  p.typing_rate = j.value("typing_rate", 0.0);
  p.mouse_move_rate = j.value("mouse_move_rate", 0.0);
  p.click_rate = j.value("click_rate", 0.0);
  p.download_throughput = j.value("download_throughput", 0.0);
  p.video_burst_period_s = j.value("video_burst_period_s", 0.0);
  p.video_burst_frames = j.value("video_burst_frames", 16);
  p.clipboard_event_count = j.value("clipboard_event_count", 0);
  p.with_udp = j.value("with_udp", false);
  p.seed = j.value("seed", std::uint64_t{0});
  return p;
}

int run_synth(const RunConfig& config) {
  std::vector<ActivityProfile> profiles;
  if (config.synth_windows > 0) {
    profiles = activity_mix_profiles(config.synth_windows, config.seed);
  } else {
    if (config.input.empty()) {
      throw ConfigError("synth needs --input profiles.json or --windows N");
    }
    const nlohmann::json j = nlohmann::json::parse(read_file(config.input));
    if (!j.is_array()) throw InvalidProfile("profile file must be a JSON array");
    for (const auto& jp : j) profiles.push_back(profile_from_json(jp));
  }
  generate_corpus(profiles, config.out);
  return 0;
}

}  // namespace

std::string config_hash(const RunConfig& config) {
  std::string canonical = command_name(config.command);
  canonical += '|' + config.input.string();
  canonical += '|' + config.labels.string();
  canonical += '|' + config.out.string();
  canonical += '|' + config.local_ip;
  canonical += '|' + (config.local_port ? std::to_string(*config.local_port) : std::string("-"));
  canonical += '|' + std::string(transport_profile_name(config.transport));
  canonical += '|' + std::to_string(config.window_sec);
  canonical += '|' + std::to_string(config.folds);
  canonical += '|' + std::to_string(config.seed);
  canonical += '|' + std::to_string(config.dct_index);
  canonical += '|' + std::to_string(config.components);
  canonical += '|' + std::to_string(config.select_mass);
  canonical += '|' + std::to_string(config.select_cap);
  canonical += '|' + std::to_string(config.synth_windows);
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(canonical)));
  return buf;
}

int run(const RunConfig& config) {
  try {
    switch (config.command) {
      case RunConfig::Command::Extract: return run_extract(config);
      case RunConfig::Command::Transform: return run_transform(config);
      case RunConfig::Command::Rank: return run_rank(config);
      case RunConfig::Command::Train: return run_train(config);
      case RunConfig::Command::Evaluate: return run_evaluate(config);
      case RunConfig::Command::Detect: return run_detect(config);
      case RunConfig::Command::Synth: return run_synth(config);
    }
    throw ConfigError("unknown command");
  } catch (const ConfigError& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": ConfigError: " << e.what()
              << "\n";
    return 1;
  } catch (const MalformedCapture& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": MalformedCapture: " << e.what()
              << "\n";
    return 1;
  } catch (const TruncatedRecord& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": TruncatedRecord: " << e.what()
              << "\n";
    return 1;
  } catch (const MissingLabel& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": MissingLabel: " << e.what()
              << "\n";
    return 1;
  } catch (const LabelSchemaError& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": LabelSchemaError: " << e.what()
              << "\n";
    return 1;
  } catch (const InvalidProfile& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": InvalidProfile: " << e.what()
              << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "rdpscope " << command_name(config.command) << ": error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace rdpscope
