#include "ombrl/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string/split.hpp>

namespace ombrl {

const std::vector<std::string> kEpisodeColumns = {
    "method",         "seed",           "episode",         "achieved_return",
    "oracle_return",  "regret_raw",     "regret_clipped",  "cumulative_regret",
    "buffer_len",     "beta",           "lambda",          "gamma_est",
    "drift_increment", "actuator_limit", "wall_time_ms"};

const std::vector<std::string> kSummaryColumns = {
    "method",          "seeds",       "final_regret_mean", "final_regret_stderr",
    "dominance_violations", "p",      "gamma_p",           "P_N",
    "drift_exact",     "learning_term", "drift_term",      "lambda_tilde",
    "B_tilde"};

namespace {

// Shortest representation that parses back to the same double.
std::string num(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("episodes.csv: bad number '" + s + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("episodes.csv: bad integer '" + s + "'");
  return v;
}

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

const std::array<const char*, 6> kPalette = {"#1f77b4", "#d62728", "#2ca02c",
                                             "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::vector<MethodSummary> summarize(const ExperimentResult& result) {
  std::vector<MethodSummary> out;
  for (const auto& run : result.runs) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const MethodSummary& m) { return m.method == run.method; });
    if (it == out.end()) {
      out.push_back({});
      it = out.end() - 1;
      it->method = run.method;
    }
    ++it->seeds;
    it->dominance_violations += run.dominance_violations;
  }
  for (auto& m : out) {
    std::vector<const RunResult*> runs;
    for (const auto& run : result.runs)
      if (run.method == m.method) runs.push_back(&run);
    std::size_t len = runs.front()->curve.cumulative.size();
    for (const auto* r : runs) len = std::min(len, r->curve.cumulative.size());
    const double k = static_cast<double>(runs.size());
    m.mean_curve.assign(len, 0.0);
    m.stderr_curve.assign(len, 0.0);
    for (std::size_t t = 0; t < len; ++t) {
      double mean = 0.0;
      for (const auto* r : runs) mean += r->curve.cumulative[t];
      mean /= k;
      double ss = 0.0;
      for (const auto* r : runs) ss += (r->curve.cumulative[t] - mean) * (r->curve.cumulative[t] - mean);
      m.mean_curve[t] = mean;
      m.stderr_curve[t] = runs.size() > 1 ? std::sqrt(ss / (k - 1.0)) / std::sqrt(k) : 0.0;
    }
    if (len > 0) {
      m.final_mean = m.mean_curve.back();
      m.final_stderr = m.stderr_curve.back();
    }
  }
  return out;
}

void write_episodes_csv(const ExperimentResult& result, std::ostream& out) {
  write_header(out, kEpisodeColumns);
  for (const auto& run : result.runs) {
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      const EpisodeRecord& r = run.records[i];
      const auto n = static_cast<std::size_t>(r.episode - 1);
      out << r.method << ',' << r.seed << ',' << r.episode << ',' << num(r.achieved_return) << ','
          << num(r.oracle_return) << ',' << num(run.curve.raw.at(n)) << ','
          << num(run.curve.instantaneous.at(n)) << ',' << num(run.curve.cumulative.at(n)) << ','
          << r.buffer_len << ',' << num(r.beta) << ',' << num(r.lambda) << ','
          << num(r.gamma_estimate) << ',' << num(r.drift_increment) << ','
          << num(r.actuator_limit) << ',' << num(r.wall_time_ms) << '\n';
    }
  }
}

void write_summary_csv(const ExperimentResult& result, std::ostream& out) {
  write_header(out, kSummaryColumns);
  for (const auto& m : summarize(result)) {
    out << m.method << ',' << m.seeds << ',' << num(m.final_mean) << ',' << num(m.final_stderr)
        << ',' << m.dominance_violations;
    const auto d = std::find_if(result.diagnostics.begin(), result.diagnostics.end(),
                                [&](const MethodDiagnostics& x) { return x.method == m.method; });
    if (d == result.diagnostics.end()) {
      out << ",,,,,,,,\n";
      continue;
    }
    const BoundDiagnostics& b = d->bound;
    out << ',' << b.p << ',' << num(b.gamma_p) << ',' << num(b.P_N) << ','
        << (d->exact_drift ? "exact" : "proxy") << ',' << num(b.learning_term) << ','
        << num(b.drift_term) << ',' << num(b.lambda_tilde) << ',' << num(b.B_tilde) << '\n';
  }
}

void write_regret_svg(const ExperimentResult& result, std::ostream& out) {
  const auto methods = summarize(result);
  constexpr double W = 640.0;
  constexpr double H = 400.0;
  constexpr double left = 60.0;
  constexpr double right = 130.0;
  constexpr double top = 20.0;
  constexpr double bottom = 40.0;

  std::size_t len = 1;
  double ymax = 0.0;
  for (const auto& m : methods) {
    len = std::max(len, m.mean_curve.size());
    for (std::size_t t = 0; t < m.mean_curve.size(); ++t)
      ymax = std::max(ymax, m.mean_curve[t] + m.stderr_curve[t]);
  }
  if (!(ymax > 0.0)) ymax = 1.0;
  const auto px = [&](std::size_t t) {
    const double span = len > 1 ? static_cast<double>(len - 1) : 1.0;
    return left + (W - left - right) * static_cast<double>(t) / span;
  };
  const auto py = [&](double v) { return H - bottom - (H - top - bottom) * v / ymax; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right
      << "\" y2=\"" << H - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << H - bottom << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">episode</text>\n";
  out << "<text x=\"14\" y=\"" << (top + H - bottom) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 "
      << (top + H - bottom) / 2 << ")\" text-anchor=\"middle\">cumulative regret</text>\n";
  out << "<text x=\"" << left - 4 << "\" y=\"" << top + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << num(ymax) << "</text>\n";
  out << "<text x=\"" << left - 4 << "\" y=\"" << H - bottom
      << "\" text-anchor=\"end\" font-size=\"10\">0</text>\n";
  out << "<text x=\"" << W - right << "\" y=\"" << H - bottom + 14
      << "\" text-anchor=\"middle\" font-size=\"10\">" << len << "</text>\n";

  for (std::size_t k = 0; k < methods.size(); ++k) {
    const auto& m = methods[k];
    const char* color = kPalette[k % kPalette.size()];
    if (m.mean_curve.empty()) continue;
    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t t = 0; t < m.mean_curve.size(); ++t)
      out << num(px(t)) << ',' << num(py(m.mean_curve[t] + m.stderr_curve[t])) << ' ';
    for (std::size_t t = m.mean_curve.size(); t-- > 0;)
      out << num(px(t)) << ',' << num(py(std::max(0.0, m.mean_curve[t] - m.stderr_curve[t])))
          << ' ';
    out << "\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" data-method=\""
        << m.method << "\" points=\"";
    for (std::size_t t = 0; t < m.mean_curve.size(); ++t)
      out << (t ? " " : "") << num(px(t)) << ',' << num(py(m.mean_curve[t]));
    out << "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(k + 1);
    out << "<text x=\"" << W - right + 10 << "\" y=\"" << ly << "\" font-size=\"12\" fill=\""
        << color << "\">" << m.method << " (" << m.seeds << " seeds)</text>\n";
  }
  out << "</svg>\n";
}

std::vector<EpisodeRow> read_episodes_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("episodes.csv: missing header");
  std::vector<std::string> cells;
  boost::algorithm::split(cells, line, [](char c) { return c == ','; });
  if (cells != kEpisodeColumns) throw std::runtime_error("episodes.csv: unexpected header");

  std::vector<EpisodeRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    boost::algorithm::split(cells, line, [](char c) { return c == ','; });
    if (cells.size() != kEpisodeColumns.size())
      throw std::runtime_error("episodes.csv: wrong column count in '" + line + "'");
    EpisodeRow row;
    EpisodeRecord& r = row.record;
    r.method = cells[0];
    r.seed = parse_int<std::uint64_t>(cells[1]);
    r.episode = parse_int<int>(cells[2]);
    r.achieved_return = parse_double(cells[3]);
    r.oracle_return = parse_double(cells[4]);
    row.regret_raw = parse_double(cells[5]);
    row.regret_clipped = parse_double(cells[6]);
    row.cumulative_regret = parse_double(cells[7]);
    r.buffer_len = parse_int<int>(cells[8]);
    r.beta = parse_double(cells[9]);
    r.lambda = parse_double(cells[10]);
    r.gamma_estimate = parse_double(cells[11]);
    r.drift_increment = parse_double(cells[12]);
    r.actuator_limit = parse_double(cells[13]);
    r.wall_time_ms = parse_double(cells[14]);
    rows.push_back(std::move(row));
  }
  return rows;
}

ReportPaths emit_report(const ExperimentResult& result, const std::string& out_dir) {
  if (result.runs.empty()) throw std::invalid_argument("emit_report: no runs to report");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory '" + out_dir + "'");

  ReportPaths paths;
  paths.episodes_csv = (fs::path(out_dir) / "episodes.csv").string();
  paths.summary_csv = (fs::path(out_dir) / "summary.csv").string();
  paths.regret_svg = (fs::path(out_dir) / "regret.svg").string();

  const auto write = [](const std::string& path, auto&& writer) {
    std::ostringstream buf;
    writer(buf);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << buf.str();
    f.close();
    if (!f) throw std::runtime_error("failed writing '" + path + "'");
  };
  write(paths.episodes_csv, [&](std::ostream& o) { write_episodes_csv(result, o); });
  write(paths.summary_csv, [&](std::ostream& o) { write_summary_csv(result, o); });
  write(paths.regret_svg, [&](std::ostream& o) { write_regret_svg(result, o); });
  return paths;
}

}  // namespace ombrl
