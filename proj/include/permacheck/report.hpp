#pragma once

#include <json.hpp>

#include <string>

#include "permacheck/assoc.hpp"
#include "permacheck/betaperm.hpp"
#include "permacheck/green.hpp"
#include "permacheck/idcheck.hpp"
#include "permacheck/sampler.hpp"

namespace permacheck {

inline constexpr int report_schema = 1;
inline constexpr int defaults_version = 1;

/// Every default grid and tolerance, echoed into each report.
nlohmann::json defaults_table();

/// Indices are rendered 1-based.
nlohmann::json to_json(const Witness& w);
nlohmann::json to_json(const Verdict& v);
nlohmann::json to_json(const IdVerdict& v);
nlohmann::json to_json(const PositivityReport& r);
nlohmann::json to_json(const GreenVerdict& v);
nlohmann::json to_json(const PlusConstantReport& r);
nlohmann::json to_json(const AssociationReport& r);
nlohmann::json to_json(const MonotonicityReport& r);
nlohmann::json to_json(const ShiftedOrderReport& r);
nlohmann::json batch_summary(const SampleBatch& b);

/// {"schema": 1, "command": ..., "defaults": ..., "result": ...}
nlohmann::json make_report(const std::string& command, nlohmann::json result);

enum class RenderFormat { json, table };

/// JSON mode is the canonical dump (sorted keys, 2-space indent). Table mode
/// is lossy: scalar fields as key/value rows, arrays of records as aligned
/// tables, nested objects flattened with dotted keys. Throws SchemaError unless
/// the input is a schema-1 report.
std::string report_render(const nlohmann::json& report, RenderFormat format);

}  // namespace permacheck
