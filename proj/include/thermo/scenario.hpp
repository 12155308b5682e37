#pragma once

// Scenario configuration, the batch runner and report emission.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermo/group.hpp"
#include "thermo/potential.hpp"

namespace thermo::cli {

using json = nlohmann::ordered_json;

struct PresetConfig {
    std::string name = "schottky_pair";
    double translation_length = 2.5;  // schottky_pair
    double c = 2.5;                    // schottky_parabolic
    double b_length = 6.0;
    std::vector<std::string> names;  // custom
    std::vector<std::array<double, 4>> matrices;
};

struct TruncationConfig {
    double max_dist = 22.0;
    long max_word_len = 1'000'000;
    std::size_t max_elements = 20'000'000;
    double max_orbit_len = 20.0;
};

struct ExpectConfig {
    std::optional<double> value;
    double tolerance = 0.05;
};

struct Settings {
    double bin_width = 1.0;
    std::string gamma_k_mode = "relaxed";
    std::vector<double> R_grid{0.5, 1.0, 1.5, 2.0};
    ExpectConfig exponent;
    struct {
        double R = 1.0;
        double tolerance = 0.05;
    } gurevic;
    struct {
        std::vector<double> R_grid{0.5, 1.0};
        std::vector<double> alpha_grid{0.1, 0.2, 0.3, 0.5};
        double tolerance = 0.1;
    } gurevic_infinity;
    struct {
        std::vector<double> lambdas{-1.0, 0.0, 1.0, 2.0, 5.0};
        pot::PotentialSpec perturbation = pot::PotentialSpec::bump(0.5, 0.8);
        double R = 1.5;
    } sweep;
    struct {
        std::vector<double> epsilons{0.1, 0.05, 0.02};
        double R = 1.0;
        double d_min = 5.0;
        double d_max = 10.0;
        double slope_tolerance = 0.07;
        double equivariance_tolerance = 0.05;
    } ps_check;
    struct {
        double R = 1.5;
        double T0 = 2.0;
        double T_step = 1.0;
        double epsilon = 0.05;
        double tolerance = 0.1;
    } recurrence;
    struct {
        std::string word = "a";
        std::size_t samples = 120;
        std::vector<double> T_grid{4.0, 6.0, 8.0, 10.0, 12.0};
        std::vector<double> epsilons{0.1, 0.2, 0.4};
        double delta = 0.9;
        double step = 0.05;
        double shift = 0.3;
        double tolerance = 0.05;
    } entropy;
    struct {
        double R_inner = 1.0;
        double R_outer = 3.0;
        std::vector<double> alphas{0.1, 0.2};
        double slack = 0.15;
    } excursion_check;
};

struct ScenarioConfig {
    PresetConfig preset;
    pot::PotentialSpec potential;
    std::vector<std::string> analyses;
    TruncationConfig truncation;
    Settings settings;
    std::uint64_t seed = 1;
};

inline const std::vector<std::string>& analysis_names() {
    static const std::vector<std::string> names{"exponent", "infinity",  "gurevic",  "gurevic_infinity", "sweep",
                                                "ps_check", "recurrence", "entropy", "excursion_check"};
    return names;
}

/// Preset-dependent defaults; `preset` must name a known family.
ScenarioConfig default_config(const std::string& preset);
/// Validates against the schema (unknown fields rejected) on top of the
/// preset defaults.
ScenarioConfig parse_config(const json& j);
json config_to_json(const ScenarioConfig& cfg);

pot::PotentialSpec parse_potential(const json& j);
json potential_to_json(const pot::PotentialSpec& spec);

grp::Presentation build_presentation(const PresetConfig& p);

struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct RunReport {
    json doc;
    std::vector<CsvTable> tables;
    bool passed = true;
};

RunReport run_scenario(const ScenarioConfig& cfg);

/// Writes report.json (format "json") or one CSV file per table plus
/// checks.csv (format "csv") into `dir`. Returns the written paths.
std::vector<std::string> emit_report(const RunReport& r, const std::string& dir, const std::string& format);
std::string report_text(const RunReport& r);
std::string csv_text(const CsvTable& t);

inline constexpr int kCsvSchemaVersion = 1;

}  // namespace thermo::cli
