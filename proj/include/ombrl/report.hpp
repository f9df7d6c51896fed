#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ombrl/harness.hpp"

namespace ombrl {

struct ReportPaths {
  std::string episodes_csv;
  std::string summary_csv;
  std::string regret_svg;
};

/// One parsed row of episodes.csv.
struct EpisodeRow {
  EpisodeRecord record;
  double regret_raw = 0.0;
  double regret_clipped = 0.0;
  double cumulative_regret = 0.0;
};

struct MethodSummary {
  std::string method;
  int seeds = 0;
  double final_mean = 0.0;
  double final_stderr = 0.0;
  int dominance_violations = 0;
  std::vector<double> mean_curve;
  std::vector<double> stderr_curve;
};

extern const std::vector<std::string> kEpisodeColumns;
extern const std::vector<std::string> kSummaryColumns;

/// Methods in first-appearance order; curves averaged over seeds.
std::vector<MethodSummary> summarize(const ExperimentResult& result);

void write_episodes_csv(const ExperimentResult& result, std::ostream& out);
void write_summary_csv(const ExperimentResult& result, std::ostream& out);
void write_regret_svg(const ExperimentResult& result, std::ostream& out);

std::vector<EpisodeRow> read_episodes_csv(std::istream& in);

/// Creates out_dir if needed; throws std::runtime_error if it cannot write.
ReportPaths emit_report(const ExperimentResult& result, const std::string& out_dir);

}  // namespace ombrl
