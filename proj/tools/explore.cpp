// explore: item-centric exploration simulator and report tool.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "explore/explore.hpp"

namespace {

// Relative output paths may be redirected with EXPLORE_OUT_DIR.
std::string resolve_output(const std::string& path) {
  const char* base = std::getenv("EXPLORE_OUT_DIR");
  if (!base || *base == '\0' || path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).string();
}

std::ofstream open_output(const std::string& path) {
  const std::string resolved = resolve_output(path);
  std::filesystem::path p(resolved);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(resolved, std::ios::binary);
  if (!out) throw explore::IoError("cannot open output file: " + resolved);
  return out;
}

int run_command(const std::string& config_path, unsigned seeds, unsigned jobs,
                const std::string& out_path, const std::string& format) {
  explore::RunConfig config = explore::load_run_config(config_path);
  if (seeds > 0) {
    config.seeds.clear();
    for (uint64_t s = 1; s <= seeds; ++s) config.seeds.push_back(s);
  }
  if (!out_path.empty()) config.output.report_path = out_path;
  if (!config.output.audit_dir.empty()) {
    config.output.audit_dir = resolve_output(config.output.audit_dir);
  }

  const explore::ExperimentReport report =
      explore::run_experiment(config, jobs);
  const nlohmann::json doc = explore::to_json(report, config);

  std::ofstream out = open_output(config.output.report_path);
  out << doc.dump(2) << '\n';
  if (!out) throw explore::IoError("failed writing report");
  out.close();

  if (format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else {
    explore::write_report_table(std::cout, report);
  }
  return 0;
}

int report_command(const std::string& in_path, const std::string& format) {
  std::ifstream in(in_path);
  if (!in) throw explore::IoError("cannot open report: " + in_path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw explore::DataError("report is not valid JSON: " + in_path);
  }
  if (format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else {
    explore::write_report_table(std::cout, explore::report_from_json(doc));
  }
  return 0;
}

int calibrate_command(const std::string& in_path, const std::string& in_format,
                      uint32_t bins, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw explore::IoError("cannot open input: " + in_path);

  std::string format = in_format;
  if (format == "auto") {
    const auto ext = std::filesystem::path(in_path).extension();
    if (ext == ".jsonl" || ext == ".ndjson") {
      format = "audit";
    } else if (ext == ".csv") {
      format = "csv";
    } else {
      format = in.peek() == '{' ? "audit" : "csv";
    }
  }

  std::vector<explore::PredictionEvent> events;
  if (format == "audit") {
    events = explore::prediction_events_from_audit(explore::read_audit_log(in));
  } else {
    events = explore::read_prediction_csv(in);
  }

  const auto table = explore::calibrate(events, bins);
  if (out_path.empty() || out_path == "-") {
    explore::write_calibration_csv(std::cout, table);
  } else {
    std::ofstream out = open_output(out_path);
    explore::write_calibration_csv(out, table);
  }
  return 0;
}

// Posterior trace for a fixed underlying satisfaction rate: one row per
// impression-count grid point, sigma shrinking as evidence accumulates.
int simulate_item_command(double rate, uint64_t impressions, uint64_t step,
                          double prior_alpha, double prior_beta,
                          const std::string& out_path) {
  const explore::BetaPrior prior{prior_alpha, prior_beta};

  const auto write_trace = [&](std::ostream& out) {
    out << "impressions,posterior_mean,posterior_std\n";
    out.precision(17);
    for (uint64_t n = 0;; n += step) {
      if (n > impressions) break;
      const auto satisfied =
          static_cast<uint64_t>(std::llround(rate * static_cast<double>(n)));
      const explore::BetaPosterior posterior =
          explore::posterior_from(prior, satisfied, n);
      out << n << ',' << posterior.mean() << ',' << posterior.std_dev()
          << '\n';
    }
  };

  if (out_path.empty() || out_path == "-") {
    write_trace(std::cout);
  } else {
    std::ofstream out = open_output(out_path);
    write_trace(out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Item-centric exploration for cold-start recommendation"};
  app.require_subcommand(1);

  std::string config_path, in_path, out_path, format = "table";
  std::string in_format = "auto";
  unsigned seeds = 0, jobs = 1;
  uint32_t bins = 10;
  double rate = 0.0, prior_alpha = 1.0, prior_beta = 1.0;
  uint64_t impressions = 1000, grid_step = 10;

  CLI::App* run = app.add_subcommand(
      "run", "Run the user-corpus co-diverted experiment");
  run->add_option("--config", config_path, "Run config (JSON)")
      ->required();
  run->add_option("--seeds", seeds,
                  "Override the config seed list with seeds 1..N");
  run->add_option("--jobs", jobs, "Seeds simulated in parallel")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", out_path, "Report output path");
  run->add_option("--format", format, "Summary printed to stdout")
      ->check(CLI::IsMember({"table", "json"}));

  CLI::App* report = app.add_subcommand("report", "Format a saved report");
  report->add_option("--in", in_path, "Report JSON path")->required();
  report->add_option("--format", format, "Output format")
      ->check(CLI::IsMember({"table", "json"}));

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Reliability table from an audit log or prediction CSV");
  calibrate->add_option("--in", in_path, "Audit .jsonl or predicted,satisfied CSV")
      ->required();
  calibrate->add_option("--input-format", in_format, "Input kind")
      ->check(CLI::IsMember({"auto", "audit", "csv"}));
  calibrate->add_option("--bins", bins, "Number of equal-width bins")
      ->check(CLI::Range(2u, 1000000u));
  calibrate->add_option("--out", out_path, "Output CSV path (default stdout)");

  CLI::App* simulate = app.add_subcommand(
      "simulate-item",
      "Posterior mean/std trace for one item at a fixed satisfaction rate");
  simulate->add_option("--rate", rate, "Underlying satisfaction rate")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--impressions", impressions, "Max impressions");
  simulate->add_option("--step", grid_step, "Impression grid step")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--prior-alpha", prior_alpha, "Beta prior alpha")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--prior-beta", prior_beta, "Beta prior beta")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out", out_path, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      return run_command(config_path, seeds, jobs, out_path, format);
    }
    if (report->parsed()) {
      return report_command(in_path, format);
    }
    if (calibrate->parsed()) {
      return calibrate_command(in_path, in_format, bins, out_path);
    }
    if (simulate->parsed()) {
      return simulate_item_command(rate, impressions, grid_step, prior_alpha,
                                   prior_beta, out_path);
    }
  } catch (const explore::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
