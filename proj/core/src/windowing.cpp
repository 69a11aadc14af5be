#include "rdpscope/windowing.hpp"

#include <algorithm>
#include <charconv>
#include <limits>
#include <map>

#include "rdpscope/errors.hpp"

namespace rdpscope {

std::vector<Window> segment_windows(const std::vector<Conversation>& conversations,
                                    const WindowingOptions& options) {
  if (options.window_len_us <= 0) {
    throw ConfigError("window length must be positive");
  }
  std::int64_t first_ts = std::numeric_limits<std::int64_t>::max();
  std::int64_t last_ts = std::numeric_limits<std::int64_t>::min();
  for (const Conversation& conv : conversations) {
    for (const PacketRecord& p : conv.packets) {
      first_ts = std::min(first_ts, p.timestamp_us);
      last_ts = std::max(last_ts, p.timestamp_us);
    }
  }
  if (last_ts < first_ts) return {};  // no packets at all

  std::int64_t origin;
  if (options.origin == WindowOrigin::FirstPacket) {
    origin = (first_ts / 1'000'000) * 1'000'000;
    if (first_ts < 0 && first_ts % 1'000'000 != 0) origin -= 1'000'000;
  } else {
    origin = options.origin_us;
  }
  if (last_ts < origin) return {};

  const std::int64_t len = options.window_len_us;
  const std::int64_t tiles = (last_ts - origin) / len + 1;

  std::vector<Window> windows(static_cast<std::size_t>(tiles));
  for (std::int64_t k = 0; k < tiles; ++k) {
    windows[static_cast<std::size_t>(k)].start_us = origin + k * len;
    windows[static_cast<std::size_t>(k)].length_us = len;
  }

  for (const Conversation& conv : conversations) {
    // One slice per window, materialized lazily so empty slices never exist.
    std::vector<Conversation*> slices(static_cast<std::size_t>(tiles), nullptr);
    for (const PacketRecord& p : conv.packets) {
      if (p.timestamp_us < origin) continue;
      const auto k = static_cast<std::size_t>((p.timestamp_us - origin) / len);
      if (slices[k] == nullptr) {
        windows[k].conversations.push_back(Conversation{conv.key, {}});
        slices[k] = &windows[k].conversations.back();
      }
      slices[k]->packets.push_back(p);
    }
  }

  std::vector<Window> result;
  result.reserve(windows.size());
  for (Window& w : windows) {
    if (w.conversations.empty()) continue;
    w.partial = w.start_us + w.length_us > last_ts + 1;
    result.push_back(std::move(w));
  }
  return result;
}

namespace {

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      fields.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return fields;
}

bool parse_bit(std::string_view field, bool& out) {
  if (field == "0") {
    out = false;
    return true;
  }
  if (field == "1") {
    out = true;
    return true;
  }
  return false;
}

}  // namespace

std::vector<Window> attach_labels(std::vector<Window> windows, std::string_view label_csv) {
  std::map<std::int64_t, LabelBits> rows;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= label_csv.size()) {
    std::size_t eol = label_csv.find('\n', pos);
    if (eol == std::string_view::npos) eol = label_csv.size();
    std::string_view line = label_csv.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kLabelCsvHeader) {
        throw LabelSchemaError("label file header must be \"" + std::string(kLabelCsvHeader) +
                               "\", got \"" + std::string(line) + "\"");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) {
      throw LabelSchemaError("label row " + std::to_string(line_no) + " has " +
                             std::to_string(fields.size()) + " columns, expected 6");
    }
    std::int64_t start = 0;
    const auto [ptr, ec] =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), start);
    if (ec != std::errc{} || ptr != fields[0].data() + fields[0].size()) {
      throw LabelSchemaError("label row " + std::to_string(line_no) + ": bad start_us \"" +
                             std::string(fields[0]) + "\"");
    }
    LabelBits bits{};
    for (std::size_t i = 0; i < 5; ++i) {
      if (!parse_bit(fields[i + 1], bits[i])) {
        throw LabelSchemaError("label row " + std::to_string(line_no) + ": label columns must be 0 or 1");
      }
    }
    rows[start] = bits;
  }
  if (!header_seen) throw LabelSchemaError("label file is empty");

  for (Window& w : windows) {
    auto it = rows.find(w.start_us);
    if (it == rows.end()) {
      throw MissingLabel("no label row for window starting at " + std::to_string(w.start_us) +
                         " us");
    }
    w.labels = it->second;
    w.labeled = true;
  }
  return windows;
}

std::string write_label_csv(const std::vector<std::pair<std::int64_t, LabelBits>>& rows) {
  std::string out(kLabelCsvHeader);
  out += '\n';
  for (const auto& [start, bits] : rows) {
    out += std::to_string(start);
    for (bool b : bits) {
      out += ',';
      out += b ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

}  // namespace rdpscope
