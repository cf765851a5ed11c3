#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbr/bounds.hpp"
#include "mbr/environment.hpp"

namespace mbr {

inline constexpr int kSchemaVersion = 1;

/// An instance file: the environment, its partial-feedback structure when it
/// has one, and bound settings (metrics, Lipschitz constant, sigma^2).
struct Instance {
  std::string id;
  EnvironmentSpec spec;
  std::optional<PartialFeedbackSpec> feedback;
  BoundConfig config;

  const PartialFeedbackSpec* feedback_ptr() const { return feedback ? &*feedback : nullptr; }
};

/// Strict parse: unknown keys, wrong shapes and invalid kernels are errors.
/// Syntax errors throw ParseError naming `source` and the line; kernel
/// defects throw ValidationError listing every violation.
Instance parse_instance(const std::string& text, const std::string& source = "<string>");
Instance load_instance(const std::string& path);

std::string instance_to_json(const Instance& instance);

std::string report_to_json(const BoundReport& report);
/// {"schema_version", "suite", "reports": [...]}
std::string reports_to_json(const std::string& suite, const std::vector<BoundReport>& reports);

/// Column order: instance_id, bound_name, value, mbr_exact, thompson_regret,
/// slack, holds, applicable.
std::string report_csv_header();
std::string report_csv_rows(const BoundReport& report);

/// 17 significant digits, so parsing restores the double exactly; "inf" for +infinity.
std::string format_number(double v);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace mbr
