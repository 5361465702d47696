#include "zrp/report.hpp"

#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "zrp/common.hpp"

namespace zrp {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string render_json(const Json& payload) {
    Json out;
    out["schema"] = 1;
    for (auto it = payload.begin(); it != payload.end(); ++it) out[it.key()] = it.value();
    return out.dump(2) + "\n";
}

void emit_json(const Json& payload, const std::string& path) {
    if (payload.empty()) throw ConfigError("emit_json: refusing to write an empty report");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("emit_json: cannot open " + path);
    out << render_json(payload);
    if (!out) throw ConfigError("emit_json: write failed for " + path);
}

void emit_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
              const std::string& path, const std::pair<int, int>* gnuplot_cols) {
    if (rows.empty()) throw ConfigError("emit_csv: refusing to write an empty report");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("emit_csv: cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ",";
        out << header[i];
    }
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ",";
            out << format_double(row[i]);
        }
        out << "\n";
    }
    if (!out) throw ConfigError("emit_csv: write failed for " + path);

    if (gnuplot_cols) {
        std::string dat = path;
        auto dot = dat.rfind('.');
        if (dot != std::string::npos) dat.erase(dot);
        dat += ".dat";
        std::ofstream gp(dat, std::ios::binary);
        if (!gp) throw ConfigError("emit_csv: cannot open " + dat);
        for (const auto& row : rows)
            gp << format_double(row[static_cast<std::size_t>(gnuplot_cols->first)]) << " "
               << format_double(row[static_cast<std::size_t>(gnuplot_cols->second)]) << "\n";
    }
}

}  // namespace zrp
