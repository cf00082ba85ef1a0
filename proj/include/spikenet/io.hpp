#pragma once

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spikenet/campaign.hpp"
#include "spikenet/config.hpp"
#include "spikenet/version.hpp"

namespace spikenet::io {

using json = nlohmann::ordered_json;

class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class format_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view samples_header =
    "replication,seed,extinction_time,spike_events,leak_events,terminated_by";

inline std::string format_double17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string samples_csv(std::span<const ExtinctionRecord> records) {
  std::string out(samples_header);
  out += '\n';
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    out += std::to_string(r);
    out += ',';
    out += std::to_string(rec.seed);
    out += ',';
    out += format_double17(rec.extinction_time);
    out += ',';
    out += std::to_string(rec.spike_events);
    out += ',';
    out += std::to_string(rec.leak_events);
    out += ',';
    out += to_string(rec.terminated_by);
    out += '\n';
  }
  return out;
}

namespace detail {

template <class T>
T parse_field(std::string_view tok, std::size_t line, const char* what) {
  T out{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc{} || p != tok.data() + tok.size())
    throw format_error("samples line " + std::to_string(line) + ": bad " + what + " '" +
                       std::string(tok) + "'");
  return out;
}

}  // namespace detail

// Rows must appear in replication order starting at 0.
inline std::vector<ExtinctionRecord> parse_samples_csv(std::string_view text) {
  std::vector<ExtinctionRecord> records;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line) || (++line_no, line != samples_header))
    throw format_error("samples file must start with header: " + std::string(samples_header));
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (f.size() != 6)
      throw format_error("samples line " + std::to_string(line_no) + ": expected 6 fields");
    const auto rep = detail::parse_field<std::uint64_t>(f[0], line_no, "replication");
    if (rep != records.size())
      throw format_error("samples line " + std::to_string(line_no) + ": replication out of order");
    ExtinctionRecord rec;
    rec.seed = detail::parse_field<std::uint64_t>(f[1], line_no, "seed");
    rec.extinction_time = detail::parse_field<double>(f[2], line_no, "extinction_time");
    rec.spike_events = detail::parse_field<std::uint64_t>(f[3], line_no, "spike_events");
    rec.leak_events = detail::parse_field<std::uint64_t>(f[4], line_no, "leak_events");
    if (f[5] == "extinction")
      rec.terminated_by = Termination::extinction;
    else if (f[5] == "max_events")
      rec.terminated_by = Termination::max_events;
    else if (f[5] == "max_time")
      rec.terminated_by = Termination::max_time;
    else
      throw format_error("samples line " + std::to_string(line_no) + ": bad terminated_by");
    records.push_back(rec);
  }
  return records;
}

inline json optional_number(const std::optional<double>& x) {
  return x ? json(*x) : json(nullptr);
}

inline json summary_json(const CampaignSummary& s) {
  json j;
  j["n_samples"] = s.samples.size();
  j["n_capped"] = s.n_capped;
  j["mean"] = optional_number(s.mean);
  j["variance"] = optional_number(s.variance);
  j["renormalized_variance"] = optional_number(s.renormalized_variance);
  j["ks_distance"] = optional_number(s.ks_distance);
  if (s.histogram)
    j["histogram"] = json{{"edges", s.histogram->edges}, {"densities", s.histogram->densities}};
  else
    j["histogram"] = nullptr;
  return j;
}

inline json log_fit_json(const stats::LogFit& f) {
  return json{{"C", f.C},
              {"intercept", f.intercept},
              {"r_squared", f.r_squared},
              {"C_no_intercept", f.C_no_intercept}};
}

// Summary of a sweep: one entry per point plus the log fit when present.
inline json sweep_summary_json(const CampaignResult& result) {
  json points = json::array();
  for (const auto& p : result.points) {
    json entry{{"sweep_index", p.sweep_index}, {"neuron_count", p.neuron_count}, {"gamma", p.gamma}};
    const json s = summary_json(p.summary);
    for (const auto& [k, v] : s.items()) entry[k] = v;
    points.push_back(std::move(entry));
  }
  json j{{"points", std::move(points)}};
  j["log_fit"] = result.log_fit ? log_fit_json(*result.log_fit) : json(nullptr);
  return j;
}

inline json logfit_file_json(const CampaignResult& result) {
  json j = result.log_fit ? log_fit_json(*result.log_fit)
                          : json{{"C", nullptr}, {"intercept", nullptr}, {"r_squared", nullptr},
                                 {"C_no_intercept", nullptr}};
  json pts = json::array();
  for (const auto& p : result.points)
    pts.push_back(json{{"neuron_count", p.neuron_count},
                       {"mean", optional_number(p.summary.mean)},
                       {"variance", optional_number(p.summary.variance)},
                       {"renormalized_variance", optional_number(p.summary.renormalized_variance)}});
  j["points"] = std::move(pts);
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline std::string utc_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct RunManifest {
  CampaignSpec config;
  std::string command;
  std::string code_version{version};
  std::string started_at;
  std::string finished_at;
};

inline json manifest_json(const RunManifest& m) {
  return json{{"command", m.command},
              {"code_version", m.code_version},
              {"master_seed", m.config.master_seed ? json(*m.config.master_seed) : json(nullptr)},
              {"started_at", m.started_at},
              {"finished_at", m.finished_at},
              {"config", emit_config(m.config)}};
}

inline RunManifest parse_manifest(std::string_view text) {
  RunManifest m;
  try {
    const auto j = json::parse(text);
    m.command = j.at("command").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.config = parse_config(j.at("config").get<std::string>());
  } catch (const json::exception& e) {
    throw format_error(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw io_error("read failed: " + path.string());
  return ss.str();
}

// Writes to a sibling temporary and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw io_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw io_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace spikenet::io
