#include "rdpscope/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "rdpscope/errors.hpp"

namespace rdpscope {

namespace {

// Base attribute order is fixed: the flow-meter block, then the RDP
// frame-length bins, then the PUSH counters.
const std::vector<std::string>& base_names() {
  static const std::vector<std::string> names = {
      "ACK Flag Cnt", "Active Max", "Active Mean", "Active Min", "Active Std",
      "Bwd Blk Rate Avg", "Bwd Byts/b Avg", "Bwd Header Len", "Bwd IAT Max", "Bwd IAT Mean",
      "Bwd IAT Min", "Bwd IAT Std", "Bwd IAT Tot", "Bwd PSH Flags", "Bwd Pkt Len Max",
      "Bwd Pkt Len Mean", "Bwd Pkt Len Min", "Bwd Pkt Len Std", "Bwd Pkts/b Avg", "Bwd Pkts/s",
      "Bwd Seg Size Avg", "Bwd URG Flags", "CWE Flag Count", "ECE Flag Cnt", "FIN Flag Cnt",
      "Flow Byts/s", "Flow Duration", "Flow IAT Max", "Flow IAT Mean", "Flow IAT Min",
      "Flow IAT Std", "Flow Pkts/s", "Fwd Blk Rate Avg", "Fwd Byts/b Avg", "Fwd Header Len",
      "Fwd IAT Max", "Fwd IAT Mean", "Fwd IAT Min", "Fwd IAT Std", "Fwd IAT Tot",
      "Fwd PSH Flags", "Fwd Pkt Len Max", "Fwd Pkt Len Mean", "Fwd Pkt Len Min",
      "Fwd Pkt Len Std", "Fwd Pkts/b Avg", "Fwd Pkts/s", "Fwd Seg Size Avg", "Fwd URG Flags",
      "Idle Max", "Idle Mean", "Idle Min", "Idle Std", "Init Bwd Win Byts", "Init Fwd Win Byts",
      "PSH Flag Cnt", "Pkt Len Max", "Pkt Len Mean", "Pkt Len Min", "Pkt Len Std", "Pkt Len Var",
      "Pkt Size Avg", "RST Flag Cnt", "SYN Flag Cnt", "Subflow Bwd Byts", "Subflow Bwd Pkts",
      "Subflow Fwd Byts", "Subflow Fwd Pkts", "Tot Bwd Pkts", "Tot Fwd Pkts", "TotLen Bwd Pkts",
      "TotLen Fwd Pkts", "URG Flag Cnt",
      "FwdFrame91-93", "FwdFrame80-91", "FwdFrame90-94", "FwdFrame96-98", "FwdFrame103-105",
      "FwdFrame1280-2559",
      "BwdFrame40-79", "BwdFrame80-159", "BwdFrame160-319", "BwdFrame320-639",
      "BwdFrame640-1279", "BwdFrame1280-2559",
      "BwdPUSH", "FwdPUSH"};
  return names;
}

std::vector<std::string> full_names() {
  std::vector<std::string> names = base_names();
  names.push_back("dct_col");
  for (int i = 0; i < 20; ++i) names.push_back("svd" + std::to_string(i));
  for (int i = 0; i < 20; ++i) names.push_back("ica" + std::to_string(i));
  return names;
}

constexpr std::string_view kSchemaVersion = "rdp-attrs-1";

struct Summary {
  std::size_t n = 0;
  double min = 0, max = 0, mean = 0, std_dev = 0, sum = 0;
};

// Unbiased (n-1) standard deviation; every statistic is 0 for empty input
// and std is 0 for a single value.
Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.min = xs[0];
  s.max = xs[0];
  for (double x : xs) {
    s.sum += x;
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
  }
  s.mean = s.sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

std::vector<double> deltas(const std::vector<double>& ts) {
  std::vector<double> d;
  if (ts.size() > 1) {
    d.reserve(ts.size() - 1);
    for (std::size_t i = 1; i < ts.size(); ++i) d.push_back(ts[i] - ts[i - 1]);
  }
  return d;
}

struct BulkStats {
  std::size_t bulk_count = 0;
  double total_bytes = 0;
  double total_packets = 0;
  double total_duration_us = 0;

  double bytes_per_bulk() const {
    return bulk_count ? total_bytes / static_cast<double>(bulk_count) : 0.0;
  }
  double packets_per_bulk() const {
    return bulk_count ? total_packets / static_cast<double>(bulk_count) : 0.0;
  }
  double byte_rate() const {
    return total_duration_us > 0 ? total_bytes / (total_duration_us / 1e6) : 0.0;
  }
  double packet_rate() const {
    return total_duration_us > 0 ? total_packets / (total_duration_us / 1e6) : 0.0;
  }
};

// A bulk is a maximal run of payload-bearing packets in one direction whose
// consecutive inter-arrivals stay within the gap, with at least
// min_packets members.
BulkStats bulk_stats(const std::vector<const PacketRecord*>& dir_packets,
                     const FlowStatsOptions& opt) {
  BulkStats stats;
  std::vector<const PacketRecord*> run;
  auto flush = [&]() {
    if (static_cast<int>(run.size()) >= opt.bulk_min_packets) {
      ++stats.bulk_count;
      stats.total_packets += static_cast<double>(run.size());
      for (const PacketRecord* p : run) stats.total_bytes += p->payload_len;
      stats.total_duration_us +=
          static_cast<double>(run.back()->timestamp_us - run.front()->timestamp_us);
    }
    run.clear();
  };
  for (const PacketRecord* p : dir_packets) {
    if (p->payload_len == 0) continue;
    if (!run.empty() && p->timestamp_us - run.back()->timestamp_us > opt.bulk_gap_us) flush();
    run.push_back(p);
  }
  flush();
  return stats;
}

struct FrameBin {
  const char* name;
  Direction dir;
  std::uint32_t lo;
  std::uint32_t hi;
};

constexpr FrameBin kFrameBins[] = {
    {"FwdFrame91-93", Direction::Forward, 91, 93},
    {"FwdFrame80-91", Direction::Forward, 80, 91},
    {"FwdFrame90-94", Direction::Forward, 90, 94},
    {"FwdFrame96-98", Direction::Forward, 96, 98},
    {"FwdFrame103-105", Direction::Forward, 103, 105},
    {"FwdFrame1280-2559", Direction::Forward, 1280, 2559},
    {"BwdFrame40-79", Direction::Backward, 40, 79},
    {"BwdFrame80-159", Direction::Backward, 80, 159},
    {"BwdFrame160-319", Direction::Backward, 160, 319},
    {"BwdFrame320-639", Direction::Backward, 320, 639},
    {"BwdFrame640-1279", Direction::Backward, 640, 1279},
    {"BwdFrame1280-2559", Direction::Backward, 1280, 2559},
};

// Window packets merged across conversations, time-ordered (stable on ties).
std::vector<const PacketRecord*> merged_packets(const Window& window) {
  std::vector<const PacketRecord*> all;
  all.reserve(window.packet_count());
  for (const Conversation& conv : window.conversations) {
    for (const PacketRecord& p : conv.packets) all.push_back(&p);
  }
  std::stable_sort(all.begin(), all.end(), [](const PacketRecord* a, const PacketRecord* b) {
    return a->timestamp_us < b->timestamp_us;
  });
  return all;
}

class FeatureBuilder {
 public:
  explicit FeatureBuilder(const FeatureSchema& schema)
      : schema_(&schema), values_(schema.size(), 0.0) {}

  void set(std::string_view name, double v) { values_[schema_->index_of(name)] = v; }

  std::vector<double> take() { return std::move(values_); }

 private:
  const FeatureSchema* schema_;
  std::vector<double> values_;
};

}  // namespace

FeatureSchema::FeatureSchema(std::string version, std::vector<std::string> names)
    : version_(std::move(version)), names_(std::move(names)) {
  index_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto [it, inserted] = index_.emplace(names_[i], i);
    if (!inserted) throw SchemaMismatch("duplicate attribute name: " + names_[i]);
  }
}

const FeatureSchema& FeatureSchema::base() {
  static const FeatureSchema schema{std::string(kSchemaVersion), base_names()};
  return schema;
}

const FeatureSchema& FeatureSchema::full() {
  static const FeatureSchema schema{std::string(kSchemaVersion), full_names()};
  return schema;
}

std::optional<std::size_t> FeatureSchema::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSchema::index_of(std::string_view name) const {
  auto idx = find(name);
  if (!idx) throw SchemaMismatch("unknown attribute: " + std::string(name));
  return *idx;
}

FeatureSchema FeatureSchema::subset(const std::vector<std::string>& names) const {
  for (const std::string& n : names) index_of(n);
  return FeatureSchema(version_ + "/subset", names);
}

FeatureVector compute_flow_features(const Window& window, const FlowStatsOptions& options) {
  const auto all = merged_packets(window);
  if (all.empty()) throw EmptyWindow("window has no packets");

  FeatureBuilder out(FeatureSchema::base());

  std::vector<const PacketRecord*> fwd, bwd;
  std::vector<double> ts_all, ts_fwd, ts_bwd;
  std::vector<double> len_all, len_fwd, len_bwd;
  double header_fwd = 0, header_bwd = 0;
  std::uint64_t flag_counts[8] = {};
  std::uint64_t fwd_psh = 0, bwd_psh = 0, fwd_urg = 0, bwd_urg = 0;
  double init_fwd_win = -1, init_bwd_win = -1;

  for (const PacketRecord* p : all) {
    const bool is_fwd = p->direction == Direction::Forward;
    (is_fwd ? fwd : bwd).push_back(p);
    ts_all.push_back(static_cast<double>(p->timestamp_us));
    (is_fwd ? ts_fwd : ts_bwd).push_back(static_cast<double>(p->timestamp_us));
    len_all.push_back(static_cast<double>(p->payload_len));
    (is_fwd ? len_fwd : len_bwd).push_back(static_cast<double>(p->payload_len));
    (is_fwd ? header_fwd : header_bwd) += p->transport_header_len;
    if (p->transport == Transport::Tcp) {
      for (int bit = 0; bit < 8; ++bit) {
        if (p->tcp_flags & (1u << bit)) ++flag_counts[bit];
      }
      if (p->has_flag(tcpflag::kPsh)) (is_fwd ? fwd_psh : bwd_psh)++;
      if (p->has_flag(tcpflag::kUrg)) (is_fwd ? fwd_urg : bwd_urg)++;
      if (is_fwd && init_fwd_win < 0) init_fwd_win = p->tcp_window;
      if (!is_fwd && init_bwd_win < 0) init_bwd_win = p->tcp_window;
    }
  }

  const Summary s_all = summarize(len_all);
  const Summary s_fwd = summarize(len_fwd);
  const Summary s_bwd = summarize(len_bwd);
  const Summary iat_all = summarize(deltas(ts_all));
  const Summary iat_fwd = summarize(deltas(ts_fwd));
  const Summary iat_bwd = summarize(deltas(ts_bwd));

  const double duration_us = ts_all.back() - ts_all.front();
  const double duration_s = duration_us / 1e6;
  auto rate = [&](double count) { return duration_s > 0 ? count / duration_s : 0.0; };

  // Active/idle periods: the timeline splits wherever the gap between
  // consecutive packets exceeds the activity timeout.
  std::vector<double> active, idle;
  {
    double active_start = ts_all.front();
    double last = ts_all.front();
    for (std::size_t i = 1; i < ts_all.size(); ++i) {
      const double t = ts_all[i];
      if (t - last > static_cast<double>(options.activity_timeout_us)) {
        if (last > active_start) active.push_back(last - active_start);
        idle.push_back(t - last);
        active_start = t;
      }
      last = t;
    }
    if (last > active_start) active.push_back(last - active_start);
  }
  const Summary s_active = summarize(active);
  const Summary s_idle = summarize(idle);

  // Subflows: runs separated by gaps above the subflow threshold, counted on
  // the merged timeline; per-direction totals averaged over the run count.
  std::size_t subflows = 1;
  for (std::size_t i = 1; i < ts_all.size(); ++i) {
    if (ts_all[i] - ts_all[i - 1] > static_cast<double>(options.subflow_gap_us)) ++subflows;
  }

  const BulkStats bulk_fwd = bulk_stats(fwd, options);
  const BulkStats bulk_bwd = bulk_stats(bwd, options);

  out.set("Flow Duration", duration_us);
  out.set("Tot Fwd Pkts", static_cast<double>(fwd.size()));
  out.set("Tot Bwd Pkts", static_cast<double>(bwd.size()));
  out.set("TotLen Fwd Pkts", s_fwd.sum);
  out.set("TotLen Bwd Pkts", s_bwd.sum);

  out.set("Fwd Pkt Len Max", s_fwd.max);
  out.set("Fwd Pkt Len Min", s_fwd.min);
  out.set("Fwd Pkt Len Mean", s_fwd.mean);
  out.set("Fwd Pkt Len Std", s_fwd.std_dev);
  out.set("Bwd Pkt Len Max", s_bwd.max);
  out.set("Bwd Pkt Len Min", s_bwd.min);
  out.set("Bwd Pkt Len Mean", s_bwd.mean);
  out.set("Bwd Pkt Len Std", s_bwd.std_dev);
  out.set("Pkt Len Max", s_all.max);
  out.set("Pkt Len Min", s_all.min);
  out.set("Pkt Len Mean", s_all.mean);
  out.set("Pkt Len Std", s_all.std_dev);
  out.set("Pkt Len Var", s_all.std_dev * s_all.std_dev);
  out.set("Pkt Size Avg", s_all.mean);
  out.set("Fwd Seg Size Avg", s_fwd.mean);
  out.set("Bwd Seg Size Avg", s_bwd.mean);

  out.set("Flow Byts/s", rate(s_all.sum));
  out.set("Flow Pkts/s", rate(static_cast<double>(all.size())));
  out.set("Fwd Pkts/s", rate(static_cast<double>(fwd.size())));
  out.set("Bwd Pkts/s", rate(static_cast<double>(bwd.size())));

  out.set("Flow IAT Max", iat_all.max);
  out.set("Flow IAT Min", iat_all.min);
  out.set("Flow IAT Mean", iat_all.mean);
  out.set("Flow IAT Std", iat_all.std_dev);
  out.set("Fwd IAT Max", iat_fwd.max);
  out.set("Fwd IAT Min", iat_fwd.min);
  out.set("Fwd IAT Mean", iat_fwd.mean);
  out.set("Fwd IAT Std", iat_fwd.std_dev);
  out.set("Fwd IAT Tot", iat_fwd.sum);
  out.set("Bwd IAT Max", iat_bwd.max);
  out.set("Bwd IAT Min", iat_bwd.min);
  out.set("Bwd IAT Mean", iat_bwd.mean);
  out.set("Bwd IAT Std", iat_bwd.std_dev);
  out.set("Bwd IAT Tot", iat_bwd.sum);

  out.set("FIN Flag Cnt", static_cast<double>(flag_counts[0]));
  out.set("SYN Flag Cnt", static_cast<double>(flag_counts[1]));
  out.set("RST Flag Cnt", static_cast<double>(flag_counts[2]));
  out.set("PSH Flag Cnt", static_cast<double>(flag_counts[3]));
  out.set("ACK Flag Cnt", static_cast<double>(flag_counts[4]));
  out.set("URG Flag Cnt", static_cast<double>(flag_counts[5]));
  out.set("ECE Flag Cnt", static_cast<double>(flag_counts[6]));
  out.set("CWE Flag Count", static_cast<double>(flag_counts[7]));
  out.set("Fwd PSH Flags", static_cast<double>(fwd_psh));
  out.set("Bwd PSH Flags", static_cast<double>(bwd_psh));
  out.set("Fwd URG Flags", static_cast<double>(fwd_urg));
  out.set("Bwd URG Flags", static_cast<double>(bwd_urg));

  out.set("Fwd Header Len", header_fwd);
  out.set("Bwd Header Len", header_bwd);
  out.set("Init Fwd Win Byts", init_fwd_win);
  out.set("Init Bwd Win Byts", init_bwd_win);

  out.set("Active Max", s_active.max);
  out.set("Active Min", s_active.min);
  out.set("Active Mean", s_active.mean);
  out.set("Active Std", s_active.std_dev);
  out.set("Idle Max", s_idle.max);
  out.set("Idle Min", s_idle.min);
  out.set("Idle Mean", s_idle.mean);
  out.set("Idle Std", s_idle.std_dev);

  const double sf = static_cast<double>(subflows);
  out.set("Subflow Fwd Pkts", static_cast<double>(fwd.size()) / sf);
  out.set("Subflow Fwd Byts", s_fwd.sum / sf);
  out.set("Subflow Bwd Pkts", static_cast<double>(bwd.size()) / sf);
  out.set("Subflow Bwd Byts", s_bwd.sum / sf);

  out.set("Fwd Byts/b Avg", bulk_fwd.bytes_per_bulk());
  out.set("Fwd Pkts/b Avg", bulk_fwd.packets_per_bulk());
  out.set("Fwd Blk Rate Avg", bulk_fwd.byte_rate());
  out.set("Bwd Byts/b Avg", bulk_bwd.bytes_per_bulk());
  out.set("Bwd Pkts/b Avg", bulk_bwd.packets_per_bulk());
  out.set("Bwd Blk Rate Avg", bulk_bwd.byte_rate());

  FeatureVector fv;
  fv.values = out.take();
  fv.window_start_us = window.start_us;
  fv.labels = window.labels;
  return fv;
}

FeatureVector compute_rdp_markers(const Window& window) {
  const auto all = merged_packets(window);
  if (all.empty()) throw EmptyWindow("window has no packets");

  FeatureBuilder out(FeatureSchema::base());
  for (const FrameBin& bin : kFrameBins) {
    double count = 0;
    for (const PacketRecord* p : all) {
      if (p->direction == bin.dir && p->frame_len >= bin.lo && p->frame_len <= bin.hi) ++count;
    }
    out.set(bin.name, count);
  }
  double fwd_push = 0, bwd_push = 0;
  for (const PacketRecord* p : all) {
    if (p->transport == Transport::Tcp && p->has_flag(tcpflag::kPsh)) {
      (p->direction == Direction::Forward ? fwd_push : bwd_push) += 1;
    }
  }
  out.set("FwdPUSH", fwd_push);
  out.set("BwdPUSH", bwd_push);

  FeatureVector fv;
  fv.values = out.take();
  fv.window_start_us = window.start_us;
  fv.labels = window.labels;
  return fv;
}

FeatureVector compute_base_features(const Window& window, const FlowStatsOptions& options) {
  FeatureVector flow = compute_flow_features(window, options);
  const FeatureVector markers = compute_rdp_markers(window);
  const FeatureSchema& schema = FeatureSchema::base();
  for (const FrameBin& bin : kFrameBins) {
    const std::size_t i = schema.index_of(bin.name);
    flow.values[i] = markers.values[i];
  }
  flow.values[schema.index_of("FwdPUSH")] = markers.values[schema.index_of("FwdPUSH")];
  flow.values[schema.index_of("BwdPUSH")] = markers.values[schema.index_of("BwdPUSH")];
  return flow;
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string export_features(const std::vector<FeatureVector>& vectors, const FeatureSchema& schema,
                            const std::vector<std::pair<std::string, std::string>>& meta) {
  std::string out;
  for (const auto& [key, value] : meta) {
    out += "# " + key + "=" + value + "\n";
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (i) out += ',';
    out += schema.name(i);
  }
  for (std::string_view label : kActivityNames) {
    out += ',';
    out += label;
  }
  out += '\n';
  for (const FeatureVector& fv : vectors) {
    if (fv.values.size() != schema.size()) {
      throw SchemaMismatch("feature vector has " + std::to_string(fv.values.size()) +
                           " values, schema expects " + std::to_string(schema.size()));
    }
    for (std::size_t i = 0; i < fv.values.size(); ++i) {
      if (i) out += ',';
      out += format_real(fv.values[i]);
    }
    for (bool b : fv.labels) {
      out += ',';
      out += b ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

FeatureTable read_feature_csv(std::string_view content) {
  FeatureTable table;
  bool header_seen = false;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t n_attrs = 0;
  while (pos <= content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (!header_seen) {
      if (fields.size() < 6) throw SchemaMismatch("feature CSV header too short");
      n_attrs = fields.size() - 5;
      for (std::size_t i = 0; i < 5; ++i) {
        if (fields[n_attrs + i] != kActivityNames[i]) {
          throw SchemaMismatch("feature CSV must end with the 5 label columns");
        }
      }
      std::vector<std::string> names(fields.begin(), fields.begin() + static_cast<long>(n_attrs));
      table.schema = FeatureSchema(std::string(kSchemaVersion), std::move(names));
      header_seen = true;
      continue;
    }
    if (fields.size() != n_attrs + 5) {
      throw SchemaMismatch("feature CSV row " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " columns, expected " +
                           std::to_string(n_attrs + 5));
    }
    FeatureVector fv;
    fv.values.reserve(n_attrs);
    for (std::size_t i = 0; i < n_attrs; ++i) {
      double v = 0;
      const auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (ec != std::errc{} || ptr != fields[i].data() + fields[i].size()) {
        throw SchemaMismatch("feature CSV row " + std::to_string(line_no) + ": bad number \"" +
                             std::string(fields[i]) + "\"");
      }
      fv.values.push_back(v);
    }
    for (std::size_t i = 0; i < 5; ++i) {
      const std::string_view f = fields[n_attrs + i];
      if (f == "1") {
        fv.labels[i] = true;
      } else if (f == "0") {
        fv.labels[i] = false;
      } else {
        throw SchemaMismatch("feature CSV row " + std::to_string(line_no) +
                             ": labels must be 0 or 1");
      }
    }
    table.rows.push_back(std::move(fv));
  }
  if (!header_seen) throw SchemaMismatch("feature CSV is empty");
  return table;
}

}  // namespace rdpscope
