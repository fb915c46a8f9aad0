#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "hlpm/errors.hpp"
#include "hlpm/harness.hpp"

namespace {

void print_report(const hlpm::Report& r) {
  for (const auto& m : r.metrics) {
    const char* status = m.bound == hlpm::Bound::none ? "info" : (m.passed ? "ok" : "FAIL");
    std::printf("%-4s  %-48s %.6g", status, m.name.c_str(), m.value);
    if (m.bound == hlpm::Bound::upper) std::printf("  (<= %.3g)", m.limit);
    if (m.bound == hlpm::Bound::lower) std::printf("  (>= %.3g)", m.limit);
    std::printf("\n");
  }
  for (const auto& w : r.warnings) std::printf("warning: %s\n", w.c_str());
  std::printf("%s: %s  [config %s]\n", r.pipeline.c_str(), r.passed() ? "PASS" : "FAIL",
              r.config_hash.substr(0, 12).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Porous-media equation on the half-line: PDE solver, particle system, verification"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  for (const auto* name : {"pde", "particle", "verify", "compare", "route-check", "sweep"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "override particle.seed");
    sub->add_option("--out", out_dir, "run directory for report.json and CSV artifacts");
    sub->add_option("--threads", threads, "worker threads for the particle engine")->check(CLI::PositiveNumber);
  }

  CLI11_PARSE(app, argc, argv);
  const auto* chosen = app.get_subcommands().front();

  try {
    const auto cfg = hlpm::load_config(config_path);
    hlpm::RunOptions opt;
    if (!out_dir.empty()) opt.out = out_dir;
    if (chosen->count("--seed") > 0) opt.seed = seed;
    opt.threads = threads;
    const auto start = std::chrono::steady_clock::now();
    const auto report = hlpm::run(cfg, hlpm::parse_pipeline(chosen->get_name()), opt);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    print_report(report);
    std::fprintf(stderr, "elapsed %.2f s\n", took.count());
    return report.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
