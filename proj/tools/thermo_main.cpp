#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thermo/error.hpp"
#include "thermo/scenario.hpp"

using namespace thermo;

// Exit codes: 0 all checks pass, 1 a check failed, 2 bad usage or config,
// 3 runtime failure before the report could be assembled.
int main(int argc, char** argv) {
    CLI::App app{"thermo: pressure, recurrence and entropy estimates for Fuchsian groups"};
    std::string preset = "schottky_pair", config_path, out_dir, format = "json";
    std::vector<std::string> analyses;
    double max_dist = 0.0;
    long max_words = 0;
    bool print_config = false;

    app.add_option("--preset", preset, "schottky_pair, schottky_parabolic, modular_group or custom")
        ->capture_default_str();
    app.add_option("--config", config_path, "JSON scenario (see docs/config_schema.json)")->check(CLI::ExistingFile);
    app.add_option("--analysis", analyses, "analyses to run, in any order")
        ->check(CLI::IsMember(cli::analysis_names()));
    app.add_option("--max-dist", max_dist, "enumeration radius d(o, γo)")->check(CLI::PositiveNumber);
    app.add_option("--max-words", max_words, "word-length cap for the enumeration")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory (report printed to stdout when absent)");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_flag("--print-config", print_config, "print the effective configuration and exit");
    CLI11_PARSE(app, argc, argv);

    cli::ScenarioConfig cfg;
    try {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw Error(ErrorKind::io, "cannot read " + config_path);
            cli::json j;
            try {
                j = cli::json::parse(in);
            } catch (const nlohmann::json::parse_error& e) {
                throw Error(ErrorKind::config, config_path + ": " + e.what());
            }
            if (app.count("--preset")) {
                if (j.contains("preset") && j["preset"].is_object()) j["preset"]["name"] = preset;
                else j["preset"] = preset;
            }
            cfg = cli::parse_config(j);
        } else {
            cfg = cli::default_config(preset);
        }
        if (!analyses.empty()) cfg.analyses = analyses;
        if (max_dist > 0.0) cfg.truncation.max_dist = max_dist;
        if (max_words > 0) cfg.truncation.max_word_len = max_words;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    if (print_config) {
        std::cout << cli::config_to_json(cfg).dump(2) << '\n';
        return 0;
    }

    cli::RunReport report;
    try {
        report = cli::run_scenario(cfg);
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return e.kind() == ErrorKind::config ? 2 : 3;
    }

    try {
        if (out_dir.empty()) {
            if (format == "json") {
                std::cout << cli::report_text(report);
            } else {
                for (const auto& t : report.tables) std::cout << cli::csv_text(t) << '\n';
            }
        } else {
            for (const auto& path : cli::emit_report(report, out_dir, format)) std::cerr << "wrote " << path << '\n';
        }
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 3;
    }
    for (const auto& c : report.doc["checks"])
        if (!c["passed"].get<bool>())
            std::cerr << "FAIL " << c["analysis"].get<std::string>() << ": " << c["check"].get<std::string>() << '\n';
    return report.passed ? 0 : 1;
}
