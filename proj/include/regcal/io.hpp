#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcal/experiments.hpp"
#include "regcal/young.hpp"

namespace regcal::io {

namespace fs = std::filesystem;
using experiments::detail::format_double;

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kSummaryHeader = "scenario,metric,value,target,threshold,verdict";

inline void write_summary_rows(std::ostream& o, const std::vector<experiments::SummaryRow>& rows) {
  for (const auto& r : rows) {
    o << r.scenario << ',' << r.metric << ',' << format_double(r.value) << ','
      << format_double(r.target) << ',' << format_double(r.threshold) << ',' << r.verdict()
      << '\n';
  }
}

inline void write_summary_csv(std::ostream& o, const std::vector<experiments::SummaryRow>& rows) {
  o << kSummaryHeader << '\n';
  write_summary_rows(o, rows);
}

/// Grid stride giving about `points` samples per curve; the last node is
/// always written.
inline std::size_t thin_stride(const Grid& g, std::size_t points) {
  return std::max<std::size_t>(1, g.steps() / std::max<std::size_t>(1, points - 1));
}

inline void write_curve_rows(std::ostream& o, std::size_t member, double eps,
                             const SamplePath& p, std::size_t stride) {
  const Grid& g = p.grid();
  for (std::size_t j = 0; j < g.size(); j += stride) {
    o << member << ',' << format_double(eps) << ',' << format_double(g.time(j)) << ','
      << format_double(p[j]) << '\n';
  }
  if (g.steps() % stride != 0) {
    o << member << ',' << format_double(eps) << ',' << format_double(g.horizon()) << ','
      << format_double(p.back()) << '\n';
  }
}

inline void write_curves_csv(std::ostream& o, const experiments::CurveSet& set,
                             std::size_t points) {
  o << "member,eps,t,value\n";
  for (const auto& c : set.curves) {
    write_curve_rows(o, c.member, c.eps, c.path, thin_stride(c.path.grid(), points));
  }
}

/// One row per eps; exceed_frac is the fraction of members above delta.
inline void write_report_csv(std::ostream& o, const ConvergenceReport& rep) {
  o << "eps,median_D,p90_D,exceed_frac\n";
  for (const auto& r : rep.rows) {
    o << format_double(r.eps) << ',' << format_double(r.median) << ',' << format_double(r.p90)
      << ',' << format_double(r.exceed_frac.empty() ? 0.0 : r.exceed_frac.front()) << '\n';
  }
}

inline void write_manifest(std::ostream& o,
                           const std::vector<std::pair<std::string, std::string>>& kv) {
  for (const auto& [k, v] : kv) o << k << " = " << v << '\n';
}

inline void write_holder_csv(std::ostream& o, const std::vector<HolderEstimate>& hs) {
  o << "alpha,N_alpha,s_star,t_star\n";
  for (const auto& h : hs) {
    o << format_double(h.alpha) << ',' << format_double(h.norm) << ','
      << format_double(h.s_star) << ',' << format_double(h.t_star) << '\n';
  }
}

inline void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  }
}

/// Writes `text` to `path` in binary mode (no newline translation).
inline void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw io_error("cannot write '" + path.string() + "'");
  f << text;
  if (!f) throw io_error("write failed for '" + path.string() + "'");
}

inline std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot read '" + path.string() + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

template <class F>
std::string render(F&& f) {
  std::ostringstream o;
  f(o);
  return o.str();
}

/// Layout under `dir/<scenario>/`: manifest.txt, summary.csv,
/// curves_<name>.csv, report_<name>.csv. Returns the files written.
inline std::vector<fs::path> write_scenario(const fs::path& dir,
                                            const experiments::ScenarioResult& r,
                                            std::size_t curve_points) {
  const fs::path sub = dir / r.id;
  ensure_dir(sub);
  std::vector<fs::path> files;
  auto put = [&](const fs::path& p, const std::string& text) {
    write_file(p, text);
    files.push_back(p);
  };
  put(sub / "manifest.txt", render([&](std::ostream& o) { write_manifest(o, r.manifest); }));
  put(sub / "summary.csv", render([&](std::ostream& o) { write_summary_csv(o, r.rows); }));
  for (const auto& c : r.curves) {
    put(sub / ("curves_" + c.name + ".csv"),
        render([&](std::ostream& o) { write_curves_csv(o, c, curve_points); }));
  }
  for (const auto& rep : r.reports) {
    put(sub / ("report_" + rep.name + ".csv"),
        render([&](std::ostream& o) { write_report_csv(o, rep.report); }));
  }
  return files;
}

struct SummaryRecord {
  std::string scenario;
  std::string metric;
  std::string value;
  std::string target;
  std::string threshold;
  std::string verdict;
};

inline std::vector<SummaryRecord> parse_summary_csv(const std::string& text,
                                                    const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kSummaryHeader) {
    throw io_error("'" + source + "' is not a summary file (bad header)");
  }
  std::vector<SummaryRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 6) throw io_error("'" + source + "': malformed row '" + line + "'");
    out.push_back(SummaryRecord{f[0], f[1], f[2], f[3], f[4], f[5]});
  }
  return out;
}

/// Markdown summary of every scenario directory (one holding manifest.txt)
/// under `dir`.
inline std::string markdown_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw io_error("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> scenario_dirs;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.txt")) {
      scenario_dirs.push_back(e.path());
    }
  }
  std::sort(scenario_dirs.begin(), scenario_dirs.end());
  if (scenario_dirs.empty()) {
    throw io_error("no scenario outputs under '" + dir.string() + "'");
  }
  std::vector<std::string> missing;
  for (const auto& d : scenario_dirs) {
    if (!fs::exists(d / "summary.csv")) missing.push_back((d / "summary.csv").string());
  }
  if (!missing.empty()) {
    std::string msg = "missing summary files:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw io_error(msg);
  }

  std::ostringstream head, body;
  head << "# regcal run summary\n\n"
       << "| scenario | verdict | checks passed | fitted rates |\n"
       << "|---|---|---|---|\n";
  body << "\n| scenario | metric | value | target | threshold | verdict |\n"
       << "|---|---|---|---|---|---|\n";
  for (const auto& d : scenario_dirs) {
    const auto path = d / "summary.csv";
    const auto rows = parse_summary_csv(read_file(path), path.string());
    std::size_t checks = 0, passed = 0;
    std::string rates;
    std::string id = d.filename().string();
    for (const auto& r : rows) {
      id = r.scenario;
      if (r.verdict == "info") {
        const auto dot = r.metric.rfind(".slope");
        if (dot != std::string::npos && dot + 6 == r.metric.size()) {
          if (!rates.empty()) rates += ", ";
          rates += r.metric.substr(0, dot) + " " + r.value;
        }
        continue;
      }
      ++checks;
      passed += r.verdict == "pass" ? 1 : 0;
      body << "| " << r.scenario << " | " << r.metric << " | " << r.value << " | " << r.target
           << " | " << r.threshold << " | " << r.verdict << " |\n";
    }
    head << "| " << id << " | " << (passed == checks ? "pass" : "fail") << " | " << passed << "/"
         << checks << " | " << (rates.empty() ? "-" : rates) << " |\n";
  }
  return head.str() + body.str();
}

}  // namespace regcal::io
