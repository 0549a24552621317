#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

#include "permacheck/matrix_types.hpp"

namespace permacheck {

/// Parses either CSV rows or {"dim": n, "symmetric": bool, "entries": [[...]]}.
/// Ragged rows, non-square shapes and non-finite values are rejected.
KernelMatrix parse_matrix(std::string_view text);
KernelMatrix read_matrix_file(const std::filesystem::path& path);

/// Raw CSV rows without the square/kernel requirements (used for chains).
Eigen::MatrixXd parse_csv_rows(std::string_view text);

/// Shortest round-trip decimal representation ("%.17g").
std::string format_double(double v);

std::string to_csv(const Eigen::MatrixXd& m);
nlohmann::json to_json(const KernelMatrix& g);
KernelMatrix kernel_from_json(const nlohmann::json& j);

}  // namespace permacheck
