#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "thermo/error.hpp"
#include "thermo/scenario.hpp"

using namespace thermo;
using namespace thermo::cli;

namespace {

ScenarioConfig small(std::vector<std::string> analyses) {
    auto cfg = default_config("schottky_pair");
    cfg.truncation.max_dist = 11.0;
    cfg.truncation.max_orbit_len = 11.0;
    cfg.analyses = std::move(analyses);
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("empty analysis list reports enumeration only") {
    auto r = run_scenario(small({}));
    CHECK(r.passed);
    CHECK(r.doc["analyses"].empty());
    CHECK(r.doc["checks"].empty());
    CHECK(r.doc["enumeration"]["elements"].get<std::size_t>() > 0);
    CHECK(r.doc["enumeration"]["truncation"]["certified"].get<bool>());
    // The checks table still has its header.
    REQUIRE(r.tables.size() == 1);
    auto csv = csv_text(r.tables[0]);
    CHECK(csv == "# thermo-csv v1 checks\nanalysis,check,value,relation,bound,passed,note\n");
}

TEST_CASE("config round trip") {
    for (const char* p : {"schottky_pair", "schottky_parabolic", "modular_group"}) {
        auto cfg = default_config(p);
        cfg.analyses = {"exponent", "sweep"};
        cfg.potential = pot::PotentialSpec::bump(0.2, 0.5).plus(pot::PotentialSpec::constant(0.1));
        auto j = config_to_json(cfg);
        CHECK(config_to_json(parse_config(j)) == j);
    }
}

TEST_CASE("config validation") {
    json j = config_to_json(default_config("schottky_pair"));
    j["settings"]["sweep"]["extra"] = 1;
    CHECK_THROWS_AS(parse_config(j), Error);
    CHECK_THROWS_AS(parse_config(json{{"preset", "hyperbolic_torus"}}), Error);
    CHECK_THROWS_AS(parse_config(json{{"preset", "schottky_pair"}, {"analyses", {"everything"}}}), Error);
    CHECK_THROWS_AS(parse_config(json{{"preset", "schottky_pair"}, {"settings", {{"R_grid", {2.0, 1.0}}}}}), Error);
    CHECK_THROWS_AS(parse_config(json{{"preset", "custom"}}), Error);
    auto custom = parse_config(json::parse(R"({"preset": {"name": "custom", "generators": [
        {"name": "a", "matrix": [2, 0, 0, 0.5]}]}})"));
    CHECK(build_presentation(custom.preset).rank() == 1);
}

TEST_CASE("exponent and gurevic in one report, deterministic") {
    auto cfg = small({"gurevic", "exponent"});
    auto a = run_scenario(cfg), b = run_scenario(cfg);
    CHECK(report_text(a) == report_text(b));
    const auto& an = a.doc["analyses"];
    REQUIRE(an.contains("exponent"));
    REQUIRE(an.contains("gurevic"));
    // Dependency order, not listing order.
    CHECK(an.begin().key() == "exponent");
    double d = an["exponent"]["estimate"]["value"].get<double>();
    double g = an["gurevic"]["estimate"]["value"].get<double>();
    CHECK(an["gurevic"]["difference"].get<double>() == doctest::Approx(std::abs(d - g)));
    CHECK(an["gurevic"].contains("truncation"));
    CHECK(json::parse(report_text(a)) == a.doc);
}

TEST_CASE("sweep emits one row per lambda") {
    auto cfg = small({"sweep"});
    auto r = run_scenario(cfg);
    const CsvTable* sweep = nullptr;
    for (const auto& t : r.tables)
        if (t.name == "sweep") sweep = &t;
    REQUIRE(sweep);
    CHECK(sweep->rows.size() == cfg.settings.sweep.lambdas.size());
}

TEST_CASE("a failing analysis is named and the rest still run") {
    auto cfg = small({"exponent", "gurevic"});
    cfg.settings.bin_width = 100.0;  // one bin: no fit possible
    auto r = run_scenario(cfg);
    CHECK_FALSE(r.passed);
    CHECK(r.doc["analyses"]["exponent"].contains("error"));
    CHECK(r.doc["analyses"]["gurevic"].contains("error"));
    bool named = false;
    for (const auto& c : r.doc["checks"]) named = named || c["analysis"] == "exponent";
    CHECK(named);
}

TEST_CASE("emit_report writes files") {
    auto r = run_scenario(small({"exponent"}));
    auto dir = (std::filesystem::temp_directory_path() / "thermo_emit_test").string();
    std::filesystem::remove_all(dir);
    auto js = emit_report(r, dir, "json");
    REQUIRE(js.size() == 1);
    CHECK(json::parse(slurp(js[0])) == r.doc);
    auto cs = emit_report(r, dir, "csv");
    CHECK(cs.size() == r.tables.size());
    CHECK_THROWS_AS(emit_report(r, dir, "xml"), Error);
    CHECK_THROWS_AS(emit_report(r, "/proc/no_such_dir/x", "json"), Error);
    std::filesystem::remove_all(dir);
}
