#pragma once

#include <filesystem>
#include <span>

#include <json.hpp>

#include "xmodal/pipeline.hpp"

namespace xmodal {

nlohmann::json report_to_json(const EvalReport& report);

/// {"meta": {"generated_at": ...}, "reports": [...]}. The timestamp is the
/// only run-dependent field; everything under "reports" is reproducible.
void write_reports_json(std::span<const EvalReport> reports,
                        const std::filesystem::path& path);

/// Header task,method,sparsity,r_m,k,recall; one row per (report, K).
void write_reports_csv(std::span<const EvalReport> reports,
                       const std::filesystem::path& path);

}  // namespace xmodal
