#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "zrp/common.hpp"
#include "zrp/report.hpp"

using namespace zrp;

TEST_CASE("empty reports are refused") {
    CHECK_THROWS_AS(emit_json(Json{}, "/tmp/zrp_report_test.json"), ConfigError);
    CHECK_THROWS_AS(emit_csv({"a", "b"}, {}, "/tmp/zrp_report_test.csv"), ConfigError);
}

TEST_CASE("reports are stamped and deterministic") {
    Json j;
    j["value"] = 0.125;
    j["name"] = "probe";
    std::string a = render_json(j);
    std::string b = render_json(j);
    CHECK(a == b);
    CHECK(a.find("\"schema\": 1") != std::string::npos);
    // field order is preserved as written
    CHECK(a.find("value") < a.find("name"));
}

TEST_CASE("csv emission with gnuplot companion") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "zrp_report_case";
    fs::create_directories(dir);
    auto csv = (dir / "table.csv").string();
    std::pair<int, int> cols{0, 1};
    emit_csv({"x", "y"}, {{1.0, 2.0}, {3.0, 4.5}}, csv, &cols);

    std::ifstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y");
    CHECK(fs::exists(dir / "table.dat"));
    fs::remove_all(dir);
}
