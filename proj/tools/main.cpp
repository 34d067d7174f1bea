// Command-line front end: database building, single runs, and sweeps.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mmwsim/sweep.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw mmwsim::ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  long long seed = -1;
  bool trace = false;
};

mmwsim::RunConfig load_config(const CommonOpts& opts) {
  mmwsim::RunConfig cfg =
      opts.config_path.empty()
          ? mmwsim::parse_config("")
          : mmwsim::parse_config(read_file(opts.config_path));
  if (!opts.out_dir.empty()) cfg.run.out_dir = opts.out_dir;
  if (opts.seed >= 0) cfg.run.seeds = {static_cast<std::uint64_t>(opts.seed)};
  if (opts.trace) cfg.run.trace = true;
  return cfg;
}

int emit_sweep(const mmwsim::RunConfig& cfg, const mmwsim::SweepOutput& out) {
  const std::filesystem::path dir(cfg.run.out_dir);
  write_file(dir / "results.csv", out.csv);
  write_file(dir / "resolved.ini", mmwsim::serialize_config(cfg));
  if (cfg.run.trace) {
    for (const auto& p : out.points)
      if (p.status == "ok")
        write_file(dir / ("trace_" + p.scenario_id + ".csv"),
                   p.trace.to_csv());
  }
  std::cout << out.csv;
  std::cerr << "wall_clock_s=" << out.wall_clock_s
            << " rows=" << out.points.size() << " -> "
            << (dir / "results.csv").string() << "\n";
  return out.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinated 60 GHz WLAN simulator"};
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config_path, "config file path");
    cmd->add_option("--out", opts.out_dir, "output directory override");
    cmd->add_option("--seed", opts.seed, "single-seed override");
    cmd->add_flag("--trace", opts.trace, "write per-run event traces");
  };

  auto* cmd_build =
      app.add_subcommand("build-db", "build the offline fingerprint databases");
  add_common(cmd_build);
  auto* cmd_run = app.add_subcommand("run", "run one scenario point");
  add_common(cmd_run);
  auto* cmd_sweep =
      app.add_subcommand("sweep", "run the configured scenario grid");
  add_common(cmd_sweep);

  CLI11_PARSE(app, argc, argv);

  try {
    mmwsim::RunConfig cfg = load_config(opts);
    if (cmd_build->parsed()) {
      const auto out = mmwsim::build_db_command(cfg);
      const std::filesystem::path dir(cfg.run.out_dir);
      write_file(dir / "fingerprints.db", out.file_text);
      write_file(dir / "resolved.ini", mmwsim::serialize_config(cfg));
      std::cout << out.summary;
      std::cerr << "-> " << (dir / "fingerprints.db").string() << "\n";
      return 0;
    }
    if (cmd_run->parsed()) {
      // a single point: first protocol, first AP count, first seed
      cfg.run.protocols = {cfg.run.protocols.front()};
      cfg.run.ap_counts = {cfg.run.ap_counts.front()};
      cfg.run.seeds = {cfg.run.seeds.front()};
      return emit_sweep(cfg, mmwsim::run_sweep(cfg));
    }
    return emit_sweep(cfg, mmwsim::run_sweep(cfg));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
