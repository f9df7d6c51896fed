#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ombrl/config.hpp"
#include "ombrl/harness.hpp"
#include "ombrl/report.hpp"

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', pos), csv.size());
    const std::string item = csv.substr(pos, comma - pos);
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
      throw CLI::ValidationError("--seeds", "expected comma-separated nonnegative integers");
    out.push_back(std::stoull(item));
    pos = comma + 1;
  }
  return out;
}

std::pair<int, int> parse_sweep(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      const int p = std::stoi(s);
      return {p, p};
    }
    return {std::stoi(s.substr(0, colon)), std::stoi(s.substr(colon + 1))};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--p-sweep", "expected lo:hi");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Episodic optimistic model-based RL under drifting dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::string method;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run all configured methods and write reports");
  run->add_option("--config", config_path, "Config file or bundled config name")->required();
  run->add_option("--out", out_dir, "Output directory (default from config)");
  run->add_option("--seeds", seeds, "Comma-separated seeds, e.g. 0,1,2");
  run->add_option("--method", method, "none|reset|window|all");
  run->add_flag("-q,--quiet", quiet, "No per-episode progress");

  int episode = 1;
  auto* oracle = app.add_subcommand("oracle", "Print the oracle return for one episode");
  oracle->add_option("--config", config_path, "Config file or bundled config name")->required();
  oracle->add_option("--episode", episode, "Episode index n >= 1")->required()->check(
      CLI::PositiveNumber);
  oracle->add_option("--seeds", seeds, "Comma-separated seeds");

  std::string sweep = "1:64";
  std::string gamma_index = "points";
  int candidates = 256;
  auto* diag = app.add_subcommand("diagnose", "Tabulate bound terms over buffer sizes p");
  diag->add_option("--config", config_path, "Config file or bundled config name")->required();
  diag->add_option("--p-sweep", sweep, "Range lo:hi of p");
  diag->add_option("--gamma-index", gamma_index, "points|episodes")
      ->check(CLI::IsMember({"points", "episodes"}));
  diag->add_option("--candidates", candidates, "Domain samples for the greedy gamma estimate")
      ->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    ombrl::ExperimentConfig cfg = ombrl::load_config(config_path);
    if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);

    if (*run) {
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!method.empty()) cfg.methods = ombrl::parse_methods(method, cfg.reset_period, cfg.window_size);
      cfg.validate();
      ombrl::ProgressFn progress;
      if (!quiet) {
        progress = [](const ombrl::EpisodeRecord& r) {
          std::fprintf(stderr, "%s seed=%llu n=%d return=%.3f oracle=%.3f buffer=%d\n",
                       r.method.c_str(), static_cast<unsigned long long>(r.seed), r.episode,
                       r.achieved_return, r.oracle_return, r.buffer_len);
        };
      }
      const auto result = ombrl::run_experiment(cfg, progress);
      const auto paths = ombrl::emit_report(result, cfg.output_dir);
      for (const auto& m : ombrl::summarize(result)) {
        std::printf("%s: final regret %.4f +- %.4f over %d seeds", m.method.c_str(), m.final_mean,
                    m.final_stderr, m.seeds);
        if (m.dominance_violations > 0)
          std::printf(" (%d oracle-dominance violations)", m.dominance_violations);
        std::printf("\n");
      }
      std::printf("wrote %s\nwrote %s\nwrote %s\n", paths.episodes_csv.c_str(),
                  paths.summary_csv.c_str(), paths.regret_svg.c_str());
    } else if (*oracle) {
      cfg.validate();
      std::printf("%.17g\n", ombrl::oracle_return(cfg, episode, cfg.seeds));
    } else if (*diag) {
      cfg.validate();
      const auto [lo, hi] = parse_sweep(sweep);
      const auto index =
          gamma_index == "points" ? ombrl::GammaIndex::Points : ombrl::GammaIndex::Episodes;
      std::printf("p,gamma_p,P_N,learning_term,drift_term,total,lambda_tilde,B_tilde\n");
      for (const auto& d : ombrl::diagnose(cfg, lo, hi, candidates, index)) {
        std::printf("%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", d.p, d.gamma_p, d.P_N,
                    d.learning_term, d.drift_term, d.total(), d.lambda_tilde, d.B_tilde);
      }
    }
  } catch (const ombrl::ConfigError& e) {
    std::fprintf(stderr, "invalid config:\n");
    for (const auto& issue : e.issues()) std::fprintf(stderr, "  %s\n", issue.c_str());
    return 2;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
