#include <glob.h>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mbr/experiment.hpp"
#include "mbr/io.hpp"

namespace {

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> out;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    } else {
      // No match: keep the literal so the loader reports the missing file.
      out.push_back(p);
    }
    globfree(&g);
  }
  return out;
}

std::vector<std::string> split(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const auto comma = item.find(',', start);
      const auto piece = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!piece.empty()) out.push_back(piece);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum Bayesian regret: exact values, Thompson sampling and regret bounds"};
  app.require_subcommand(1);

  std::vector<std::string> patterns;
  std::uint64_t seed = 42;
  std::size_t budget = mbr::node_budget_from_env();
  std::string out_dir = "out";
  std::vector<std::string> suites{"bounds"};
  std::vector<std::string> emit{"json", "csv"};
  std::string caps_text;

  auto* run = app.add_subcommand("run", "Evaluate instances and run the verification suites");
  run->add_option("--instances", patterns, "Instance files or glob patterns (repeatable)");
  run->add_option("--seed", seed, "Seed of the random suites");
  run->add_option("--budget", budget, "History-node budget (default MBR_NODE_BUDGET or 1000000)");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--suites", suites, "bounds, dpi, soundness, sweep-T (comma separated)");
  run->add_option("--emit", emit, "json, csv (comma separated)");
  run->add_option("--caps", caps_text, "Size caps for the soundness suite");

  std::size_t count = 1;
  auto* gen = app.add_subcommand("gen", "Write random instance files");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--count", count, "Number of instances");
  gen->add_option("--caps", caps_text, "s=3,a=3,y=3,theta=3,T=3");
  gen->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    const mbr::InstanceCaps caps = mbr::parse_caps(caps_text);
    if (gen->parsed()) {
      std::filesystem::create_directories(out_dir);
      for (std::size_t i = 0; i < count; ++i) {
        const auto inst = mbr::generate_random_instance(seed, i, caps);
        const auto path = std::filesystem::path(out_dir) / (inst.id + ".json");
        mbr::write_text_file(path.string(), mbr::instance_to_json(inst));
        std::cout << path.string() << "\n";
      }
      return 0;
    }

    mbr::RunConfig config;
    config.instance_paths = expand(patterns);
    config.seed = seed;
    config.node_budget = budget;
    config.output_dir = out_dir;
    config.caps = caps;
    config.suites.clear();
    for (const auto& s : split(suites)) config.suites.insert(mbr::parse_suite(s));
    config.emit.clear();
    for (const auto& e : split(emit)) {
      if (e == "json") config.emit.insert(mbr::Emit::Json);
      else if (e == "csv") config.emit.insert(mbr::Emit::Csv);
      else throw mbr::Error(mbr::ErrorCode::InvalidArgument, "unknown emit format '" + e + "' (json, csv)");
    }
    return mbr::run(config, std::cout).exit_status;
  } catch (const mbr::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
