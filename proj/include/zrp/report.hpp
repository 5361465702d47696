#pragma once

#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

namespace zrp {

using Json = nlohmann::ordered_json;

// %.17g rendering: shortest representation that round-trips a double.
std::string format_double(double v);

// Writes ordered JSON with schema:1 stamped in; refuses empty payloads and
// produces byte-identical output for identical inputs.
void emit_json(const Json& payload, const std::string& path);
std::string render_json(const Json& payload);

// CSV with a fixed header; one gnuplot-compatible two-column .dat alongside
// when `gnuplot_cols` names two of the columns.
void emit_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
              const std::string& path, const std::pair<int, int>* gnuplot_cols = nullptr);

}  // namespace zrp
