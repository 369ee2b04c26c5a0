#pragma once

#include "lwkdv/models.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lwkdv {

enum class ExperimentKind { kdv, micro, converge, soliton, miura, hyperbolic };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(const std::string& name);
const std::vector<ExperimentKind>& all_experiment_kinds();

// Field-level validation failure; field is a dotted path such as "grid.n".
struct ConfigError : std::invalid_argument {
    ConfigError(const std::string& field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field(field) {}
    std::string field;
};

struct InitialData {
    std::string profile = "sech";  // sech, mode or sine
    double amplitude = 0.3;
    double width = 2.0;  // sech^2((x - L/2) / width), mean removed
    int mode = 1;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::kdv;
    std::string preset = "gp_scalar";
    std::map<std::string, double> params;

    int n = 256;
    double length = 64.0;
    double t_final = 1.0;
    double dt = 0.0;  // 0 selects a default where one exists
    int snapshots = 50;

    double eps = 0.1;
    std::vector<double> eps_list;
    InitialData initial;

    // soliton
    double soliton_q = 1.0;  // scalar nonlinearity unless from_preset
    bool from_preset = false;
    double speed = 1.0;
    double profile_amplitude = -1.5;
    double profile_width = 0.5;
    int residual_n = 1024;  // grid for the profile equation residual

    // miura
    std::string miura_case = "scalar";  // scalar or d2
    Complex d2_alpha{1.0, 0.0};
    Complex d2_beta{1.0, 0.0};

    // hyperbolic: u_t = delta u_xxx - (q u^2)_x
    double dispersion = 0.0;
    double hyperbolic_q = 1.0;

    std::string output_dir = "out";
    std::uint64_t seed = 1;

    static ExperimentConfig defaults(ExperimentKind kind);
    // Unknown keys and out-of-range values throw ConfigError.
    static ExperimentConfig from_json(const nlohmann::json& j, const ExperimentKind* kind_hint = nullptr);
    nlohmann::json to_json() const;
    void validate() const;
};

struct Assertion {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct ExperimentReport {
    std::string experiment;
    nlohmann::json config_echo;
    std::vector<Assertion> assertions;
    nlohmann::json results = nlohmann::json::object();
    nlohmann::json counters = nlohmann::json::object();  // deterministic work counters
    nlohmann::json wall = nlohmann::json::object();      // wall-clock seconds, kept out of the summary
    std::string status = "ok";

    bool all_pass() const;
    nlohmann::json summary() const;
};

struct RunOptions {
    int workers = 0;  // 0 uses the hardware concurrency
    bool write_files = true;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

// Runs fn(0..count-1) on a pool of worker threads. Exceptions are rethrown after all tasks finish.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

// %.17g
std::string format_number(double v);

// Header t,name1,...; every row starts with t. Throws on ragged rows or I/O failure.
void emit_series(const std::string& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows);

void write_text(const std::string& path, const std::string& text);

}  // namespace lwkdv
