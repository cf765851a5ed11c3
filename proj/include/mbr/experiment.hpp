#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "mbr/bounds.hpp"
#include "mbr/io.hpp"
#include "mbr/planning.hpp"

namespace mbr {

enum class Suite { Bounds, Dpi, Soundness, SweepT };
enum class Emit { Json, Csv };

Suite parse_suite(const std::string& name);
const char* to_string(Suite suite);

struct InstanceCaps {
  int states = 3;
  int actions = 3;
  int outcomes = 3;  ///< |Y|, or |Y'| for partial-feedback instances
  int params = 3;
  int horizon = 3;
};

/// Parses "s=3,a=3,y=3,theta=3,T=3"; missing keys keep their defaults.
InstanceCaps parse_caps(const std::string& text);

enum class InstanceClass { General, Static, PartialFeedback };

/// Deterministic in (seed, index). The class cycles general, static,
/// partial feedback with the index. Kernel columns normalize positive
/// uniform draws; rewards lie on the grid {0, 1/4, 1/2, 3/4, 1}.
/// Partial-feedback instances reveal fully in a third of the cases and use
/// an injective preference in about two thirds.
Instance generate_random_instance(std::uint64_t seed, std::uint64_t index, const InstanceCaps& caps);
Instance generate_random_instance(RandomSource& rng, const InstanceCaps& caps, InstanceClass cls, std::string id);

/// Random knowledge kernel with up to `max_symbols` symbols; roughly a
/// quarter of the columns are point masses.
KnowledgeKernelSpec random_knowledge(RandomSource& rng, const EnvironmentSpec& spec, int max_symbols);
ProcessingKernelSpec random_processing(RandomSource& rng, const EnvironmentSpec& spec,
                                       const KnowledgeKernelSpec& know, int max_symbols);

struct DpiCase {
  std::string instance_id;
  int knowledge_symbols = 0;
  int processing_symbols = 0;
  double knowledge_value = 0.0;
  double processing_value = 0.0;
  bool holds = false;
};

struct SweepPoint {
  std::string family;
  int horizon = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool below_entropy = false;
  bool monotone = false;  ///< lhs did not decrease from the previous horizon
  bool bounds_hold = false;
};

struct SuiteSummary {
  std::string name;
  int cases = 0;
  int failed = 0;
  std::vector<std::string> failures;
};

struct RunConfig {
  std::vector<std::string> instance_paths;
  std::uint64_t seed = 42;
  std::size_t node_budget = kDefaultNodeBudget;
  std::string output_dir = ".";
  std::set<Suite> suites = {Suite::Bounds};
  std::set<Emit> emit = {Emit::Json, Emit::Csv};
  int soundness_count = 500;
  int dpi_count = 200;
  int sweep_families = 10;
  InstanceCaps caps;
};

struct RunResult {
  int exit_status = 0;  ///< 0 all hold, 1 some inequality failed, 2 input error
  std::vector<BoundReport> reports;  ///< bounds suite, then soundness suite
  std::vector<DpiCase> dpi;
  std::vector<SweepPoint> sweep;
  std::vector<SuiteSummary> summaries;
};

std::vector<BoundReport> run_soundness_suite(std::uint64_t seed, int count, const InstanceCaps& caps,
                                             std::size_t budget, SuiteSummary& summary);
std::vector<DpiCase> run_dpi_suite(std::uint64_t seed, int count, std::size_t budget, SuiteSummary& summary);
std::vector<SweepPoint> run_sweep_suite(std::uint64_t seed, int families, std::size_t budget,
                                        SuiteSummary& summary);

/// Runs the selected suites and writes the artifacts into output_dir.
/// Progress and failures go to `log`.
RunResult run(const RunConfig& config, std::ostream& log);

}  // namespace mbr
