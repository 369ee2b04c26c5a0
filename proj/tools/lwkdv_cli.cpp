#include "lwkdv/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

using namespace lwkdv;

namespace {

struct Overrides {
    std::string config;
    std::vector<double> eps;
    std::optional<int> n;
    std::optional<double> t_final;
    std::optional<std::string> output_dir;
    int workers = 0;
    bool quiet = false;
};

nlohmann::json load(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw ConfigError("--config", "cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(f, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", std::string("parse error: ") + e.what());
    }
}

int run(ExperimentKind kind, const Overrides& o)
{
    nlohmann::json j = o.config.empty() ? nlohmann::json::object() : load(o.config);
    if (!j.contains("experiment")) j["experiment"] = to_string(kind);
    if (!o.eps.empty()) {
        if (kind == ExperimentKind::converge)
            j["eps_list"] = o.eps;
        else if (o.eps.size() == 1)
            j["eps"] = o.eps.front();
        else
            throw ConfigError("--eps", "a list is only accepted by converge");
    }
    if (o.n) j["grid"]["n"] = *o.n;
    if (o.t_final) j["time"]["t_final"] = *o.t_final;
    if (o.output_dir) j["output_dir"] = *o.output_dir;
    const ExperimentConfig cfg = ExperimentConfig::from_json(j, &kind);

    RunOptions ro;
    ro.workers = o.workers;
    const ExperimentReport rep = run_experiment(cfg, ro);
    if (!o.quiet) {
        for (const auto& a : rep.assertions)
            std::cout << (a.pass ? "PASS " : "FAIL ") << a.name << " = " << a.value << " (threshold " << a.threshold << ")\n";
        if (rep.status != "ok") std::cout << rep.status << "\n";
        std::cout << "summary: " << cfg.output_dir << "/summary.json\n";
    }
    return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Long-wave KdV laboratory"};
    app.require_subcommand(1);
    Overrides o;
    ExperimentKind chosen = ExperimentKind::kdv;

    for (ExperimentKind kind : all_experiment_kinds()) {
        CLI::App* sub = app.add_subcommand(to_string(kind), "run the " + to_string(kind) + " experiment");
        sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--eps", o.eps, "eps (eps_list for converge)");
        sub->add_option("--n", o.n, "grid points");
        sub->add_option("--t-final", o.t_final, "final time");
        sub->add_option("--output-dir", o.output_dir, "artifact directory");
        sub->add_option("--workers", o.workers, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", o.quiet, "no console report");
        sub->callback([&chosen, kind] { chosen = kind; });
    }
    CLI11_PARSE(app, argc, argv);

    try {
        return run(chosen, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
