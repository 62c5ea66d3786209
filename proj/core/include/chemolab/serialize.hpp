#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "chemolab/solver.hpp"

namespace chemolab {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a_hex(std::string_view bytes);

/// `t,sup_u,sup_w,mass_u,mass_w` with a header row; doubles in shortest
/// round-trip form.
std::string timeseries_csv(const std::vector<SeriesPoint>& series);

/// JSON object (as text) describing a solver run, series excluded.
std::string solver_report_json(const SolverReport& report);

/// {harness, inputs_digest, pass, details}; `details_json` must be a JSON
/// document and is embedded as a value. Output is pretty-printed with two
/// space indentation and a trailing newline.
std::string envelope_json(std::string_view harness, std::string_view inputs_digest, bool pass,
                          std::string_view details_json);

/// Writes `content` to `path`, creating parent directories. Throws
/// Error{Io} carrying the path.
void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace chemolab
