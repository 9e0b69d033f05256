#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toric/analysis.hpp"
#include "toric/flow.hpp"
#include "toric/geometry.hpp"
#include "toric/mcondition.hpp"
#include "toric/polytope.hpp"

namespace toric {

nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const DelzantReport& r);
nlohmann::json to_json(const DiagnosticsRecord& r);
nlohmann::json to_json(const MEstimate& e);
nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const RescalingReport& r);
nlohmann::json to_json(const SingularityEvent& e);

/// One JSON object per line, no trailing spaces.
void write_jsonl(std::ostream& out, const DiagnosticsRecord& r);

/// Shortest round-trip decimal form.
std::string format_number(double x);

/// Header x0..x{n-1},A,F_norm,det_hessian,min_hessian_eig, then one row per report.
void write_curvature_csv(std::ostream& out, const std::vector<CurvatureReport>& rows);

}  // namespace toric
