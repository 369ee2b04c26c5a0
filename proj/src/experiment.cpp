#include "lwkdv/experiment.hpp"

#include "lwkdv/analysis.hpp"
#include "lwkdv/hydro.hpp"
#include "lwkdv/kdv.hpp"
#include "lwkdv/micro.hpp"
#include "lwkdv/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <set>
#include <thread>

namespace lwkdv {

using nlohmann::json;

namespace {

const double kPi = std::numbers::pi;

const std::vector<ExperimentKind> kKinds = {ExperimentKind::kdv,     ExperimentKind::micro, ExperimentKind::converge,
                                            ExperimentKind::soliton, ExperimentKind::miura, ExperimentKind::hyperbolic};

// ---- config reading --------------------------------------------------------

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed)
{
    if (!obj.is_object()) throw ConfigError(path.empty() ? "config" : path, "expected an object");
    for (const auto& [key, v] : obj.items())
        if (!allowed.count(key)) throw ConfigError(path.empty() ? key : path + "." + key, "unknown key");
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void read(const json& obj, const std::string& path, const std::string& key, double& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(join(path, key), "must be finite");
}

void read(const json& obj, const std::string& path, const std::string& key, int& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (v.is_number_integer()) {
        out = v.get<int>();
        return;
    }
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>() && std::abs(v.get<double>()) < 1e9) {
        out = static_cast<int>(v.get<double>());
        return;
    }
    throw ConfigError(join(path, key), "expected an integer");
}

void read(const json& obj, const std::string& path, const std::string& key, std::string& out)
{
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_string()) throw ConfigError(join(path, key), "expected a string");
    out = obj.at(key).get<std::string>();
}

void read(const json& obj, const std::string& path, const std::string& key, bool& out)
{
    if (!obj.contains(key)) return;
    if (!obj.at(key).is_boolean()) throw ConfigError(join(path, key), "expected true or false");
    out = obj.at(key).get<bool>();
}

void read(const json& obj, const std::string& path, const std::string& key, Complex& out)
{
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (v.is_number()) {
        out = Complex(v.get<double>(), 0.0);
        return;
    }
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        out = Complex(v[0].get<double>(), v[1].get<double>());
        return;
    }
    throw ConfigError(join(path, key), "expected a number or [re, im]");
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// ---- small numerics --------------------------------------------------------

long step_count(double t_final, double dt)
{
    return std::max<long>(1, static_cast<long>(std::ceil(t_final / dt - 1e-9)));
}

int cadence(long steps, int snapshots) { return static_cast<int>(std::max<long>(1, steps / std::max(1, snapshots))); }

RealField initial_field(const InitialData& in, const Grid& g, int dim)
{
    RealField a(g, dim);
    const double l = g.length();
    const Eigen::ArrayXd x = g.points();
    const double k = 2.0 * kPi * in.mode / l;
    for (int c = 0; c < dim; ++c) {
        if (in.profile == "sech")
            a.values.col(c) = in.amplitude * ((x - 0.5 * l - 2.0 * c) / in.width).cosh().inverse().square();
        else if (in.profile == "mode")
            a.values.col(c) = in.amplitude * (k * x + c).cos();
        else
            a.values.col(c) = in.amplitude * (k * x + c).sin();
    }
    if (in.profile == "sech") a.values.rowwise() -= a.values.colwise().mean();
    return a;
}

double max_gradient(const RealField& u) { return spectral_derivative(u, 1).values.abs().maxCoeff(); }

double relative_drift(double v, double v0) { return std::abs(v - v0) / std::max(std::abs(v0), 1e-300); }

// ---- report helpers --------------------------------------------------------

void at_most(ExperimentReport& r, const std::string& name, double value, double threshold)
{
    r.assertions.push_back({name, value, threshold, value <= threshold});
}

void below(ExperimentReport& r, const std::string& name, double value, double threshold)
{
    r.assertions.push_back({name, value, threshold, value < threshold});
}

void at_least(ExperimentReport& r, const std::string& name, double value, double threshold)
{
    r.assertions.push_back({name, value, threshold, value >= threshold});
}

struct Series {
    std::string file;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void flush(const ExperimentConfig& cfg, const RunOptions& opts, const Series& s)
{
    if (!opts.write_files || s.file.empty()) return;
    std::filesystem::create_directories(cfg.output_dir);
    emit_series((std::filesystem::path(cfg.output_dir) / s.file).string(), s.columns, s.rows);
}

// ---- experiments -----------------------------------------------------------

void run_kdv(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentReport& rep)
{
    const auto [geo, spec] = preset(parse_model_kind(cfg.preset), ModelParams::from_map(cfg.params));
    const LimitModel lm = limit_equation(geo);
    const Grid grid(cfg.n, cfg.length);
    const RealField u0 = initial_field(cfg.initial, grid, geo.dim);

    EvolveOptions o;
    o.t_final = cfg.t_final;
    o.dt = cfg.dt;
    o.snapshot_every = cadence(step_count(cfg.t_final, cfg.dt), cfg.snapshots);
    o.monitor_blowup = true;
    const Trajectory<double> tr = evolve_kdv(lm.raw, u0, o);
    rep.counters["steps"] = tr.steps;
    rep.counters["snapshots"] = tr.snapshots.size();

    const bool linear = lm.raw.nonlinearity.max_abs() <= 1e-12;
    Series s{"kdv.csv", {"mass", "hamiltonian", "max_gradient"}, {}};
    const ConservedQuantities c0 = conserved_quantities(lm.raw, u0);
    double mass_drift = 0.0, phase_error = 0.0;
    const double k = 2.0 * kPi * cfg.initial.mode / cfg.length;
    const Complex w = lm.raw.linear_symbol(k);
    const Eigen::ArrayXd x = grid.points();
    for (size_t n = 0; n < tr.snapshots.size(); ++n) {
        const RealField& u = tr.snapshots[n];
        const ConservedQuantities cq = conserved_quantities(lm.raw, u);
        s.rows.push_back({tr.times[n], cq.mass, cq.hamiltonian, max_gradient(u)});
        mass_drift = std::max(mass_drift, relative_drift(cq.mass, c0.mass));
        if (linear && cfg.initial.profile == "mode") {
            // a cos(kx + c) evolves as a Re exp(i(kx + c) + symbol(k) t)
            for (int col = 0; col < geo.dim; ++col)
                for (int j = 0; j < grid.size(); ++j) {
                    const double exact = cfg.initial.amplitude *
                                         std::exp(Complex(0.0, k * x(j) + col) + w * tr.times[n]).real();
                    phase_error = std::max(phase_error, std::abs(u.values(j, col) - exact) / std::abs(cfg.initial.amplitude));
                }
        }
    }
    flush(cfg, opts, s);

    rep.results["sound_speed"] = lm.sound_speed;
    rep.results["raw_nonlinearity_norm"] = lm.raw.nonlinearity.frobenius();
    rep.results["has_canonical"] = lm.has_canonical;
    rep.results["status"] = tr.status;
    at_most(rep, "breakdown", tr.breakdown ? 1.0 : 0.0, 0.0);
    if (linear && cfg.initial.profile == "mode") at_most(rep, "dispersion_phase_error", phase_error, 1e-10);
    if (lm.has_canonical) at_most(rep, "mass_drift", mass_drift, 1e-8);
}

void run_micro(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentReport& rep)
{
    const auto [geo, spec] = preset(parse_model_kind(cfg.preset), ModelParams::from_map(cfg.params));
    const Grid grid(cfg.n, cfg.length);
    const MicroState s0 = well_prepared_init(spec, geo, initial_field(cfg.initial, grid, geo.dim), cfg.eps);

    MicroOptions mo;
    mo.t_final = cfg.t_final;
    mo.dt = cfg.dt;
    const double dt = cfg.dt > 0.0 ? cfg.dt : default_micro_dt(spec, grid, cfg.eps);
    mo.snapshot_every = cadence(step_count(cfg.t_final, dt), cfg.snapshots);
    const MicroTrajectory tr = evolve_micro(spec, s0, mo);
    rep.counters["steps"] = tr.steps;
    rep.counters["snapshots"] = tr.states.size();

    Series s{"micro.csv", {"mass", "energy", "momentum", "norm_deviation", "phase_sup"}, {}};
    const MicroInvariants i0 = micro_invariants(spec, s0);
    double mass_drift = 0.0, energy_drift = 0.0;
    const HydroState* prev = nullptr;
    std::vector<HydroState> hydro;
    hydro.reserve(tr.states.size());
    for (size_t n = 0; n < tr.states.size(); ++n) {
        const MicroInvariants iv = micro_invariants(spec, tr.states[n]);
        hydro.push_back(extract_hydro(spec, tr.states[n], prev));
        prev = &hydro.back();
        const double phase = hydro.back().valid ? cfg.eps * hydro.back().phi.values.abs().maxCoeff()
                                                : std::numeric_limits<double>::quiet_NaN();
        s.rows.push_back({tr.times[n], iv.mass, iv.energy, iv.momentum, unit_norm_deviation(spec, tr.states[n]), phase});
        if (spec.is_gp()) mass_drift = std::max(mass_drift, relative_drift(iv.mass, i0.mass));
        energy_drift = std::max(energy_drift, std::abs(iv.energy - i0.energy));
    }
    flush(cfg, opts, s);

    rep.results["dt"] = tr.dt;
    rep.results["energy_drift"] = energy_drift;
    rep.results["status"] = tr.status;
    at_most(rep, "aborted", tr.aborted ? 1.0 : 0.0, 0.0);
    if (spec.is_gp())
        at_most(rep, "mass_drift", mass_drift, 1e-10);
    else
        at_most(rep, "unit_norm_deviation", tr.max_norm_deviation, 1e-10);
}

struct EpsRun {
    double eps = 0.0;
    std::string status = "ok";
    bool completed = false;
    long steps = 0;
    double dt = 0.0;
    LimitError error;
    double structure = 0.0;  // GP relative mass drift, spins unit-norm deviation
    double hamiltonian_drift = 0.0;
};

EpsRun converge_one(const ExperimentConfig& cfg, const RunOptions& opts, int index)
{
    EpsRun r;
    r.eps = cfg.eps_list[index];
    Series s{"converge_eps" + std::to_string(index) + ".csv",
             {"amplitude_error", "phase_error", "w_norm", "phase_sup", "energy_proxy", "hamiltonian"},
             {}};
    try {
        const auto [geo, spec] = preset(parse_model_kind(cfg.preset), ModelParams::from_map(cfg.params));
        const Grid grid(cfg.n, cfg.length);
        const RealField a0 = initial_field(cfg.initial, grid, geo.dim);

        MicroOptions mo;
        mo.t_final = cfg.t_final;
        mo.dt = cfg.dt;
        const double dt = cfg.dt > 0.0 ? cfg.dt : default_micro_dt(spec, grid, r.eps);
        mo.snapshot_every = cadence(step_count(cfg.t_final, dt), cfg.snapshots);
        const MicroTrajectory micro = evolve_micro(spec, well_prepared_init(spec, geo, a0, r.eps), mo);
        r.steps = micro.steps;
        r.dt = micro.dt;
        if (micro.aborted) throw std::runtime_error("micro run aborted: " + micro.status);

        const std::vector<HydroState> hydro = extract_trajectory(spec, micro.states);
        for (const auto& h : hydro)
            if (!h.valid) throw ChartBreakdown("chart breakdown: " + h.diagnostic);

        EvolveOptions ko;
        ko.t_final = cfg.t_final;
        ko.dt = micro.dt;
        ko.snapshot_every = mo.snapshot_every;
        const Trajectory<double> kdv = evolve_kdv(limit_equation(geo).raw, a0, ko);
        r.steps += kdv.steps;
        r.error = limit_error(geo, micro.times, hydro, kdv);

        const double m0 = micro_invariants(spec, micro.states.front()).mass;
        const double h0 = almost_hamiltonian(geo, hydro.front()).value;
        for (size_t n = 0; n < hydro.size(); ++n) {
            const double h = almost_hamiltonian(geo, hydro[n]).value;
            r.hamiltonian_drift = std::max(r.hamiltonian_drift, std::abs(h - h0));
            if (spec.is_gp())
                r.structure = std::max(r.structure, relative_drift(micro_invariants(spec, micro.states[n]).mass, m0));
            s.rows.push_back({r.error.times[n], r.error.amplitude_error[n], r.error.phase_error[n], r.error.w_norm[n],
                              r.error.phase_sup[n], r.error.energy_proxy[n], h});
        }
        if (!spec.is_gp()) r.structure = micro.max_norm_deviation;
        r.completed = true;
    } catch (const std::exception& e) {
        r.status = e.what();
    }
    flush(cfg, opts, s);
    return r;
}

void run_converge(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentReport& rep)
{
    const int m = static_cast<int>(cfg.eps_list.size());
    std::vector<EpsRun> runs(m);
    parallel_for(m, opts.workers, [&](int i) { runs[i] = converge_one(cfg, opts, i); });

    json per = json::array();
    long steps = 0;
    int failed = 0;
    double structure = 0.0, phase = 0.0;
    for (const auto& r : runs) {
        steps += r.steps;
        failed += r.completed ? 0 : 1;
        structure = std::max(structure, r.structure);
        phase = std::max(phase, r.error.sup_phase);
        per.push_back({{"eps", r.eps},
                       {"status", r.status},
                       {"dt", r.dt},
                       {"sup_amplitude_error", r.error.sup_amplitude_error},
                       {"sup_phase_error", r.error.sup_phase_error},
                       {"sup_w_norm", r.error.sup_w_norm},
                       {"sup_phase", r.error.sup_phase},
                       {"max_energy_ratio", r.error.max_energy_ratio},
                       {"hamiltonian_drift", r.hamiltonian_drift},
                       {"structure_drift", r.structure}});
    }
    rep.results["runs"] = per;
    rep.counters["steps"] = steps;
    rep.counters["runs"] = m;

    at_most(rep, "failed_runs", failed, 0);
    if (failed) return;
    auto worst_ratio = [&](auto get) {
        double w = 0.0;
        for (int i = 0; i + 1 < m; ++i) w = std::max(w, get(runs[i + 1]) / get(runs[i]));
        return w;
    };
    if (m >= 2) {
        below(rep, "amplitude_error_ratio", worst_ratio([](const EpsRun& r) { return r.error.sup_amplitude_error; }), 1.0);
        below(rep, "phase_error_ratio", worst_ratio([](const EpsRun& r) { return r.error.sup_phase_error; }), 1.0);
        below(rep, "w_norm_ratio", worst_ratio([](const EpsRun& r) { return r.error.sup_w_norm; }), 1.0);
        const auto [geo, spec] = preset(parse_model_kind(cfg.preset), ModelParams::from_map(cfg.params));
        if (spec.is_gp())
            at_most(rep, "hamiltonian_drift_ratio", worst_ratio([](const EpsRun& r) { return r.hamiltonian_drift; }), 0.75);
    }
    below(rep, "chart_phase_sup", phase, kChartRadius);
    at_most(rep, "structure_drift", structure, 1e-10);
}

void run_soliton(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentReport& rep)
{
    Tensor3 q = Tensor3::diagonal(1, cfg.soliton_q);
    if (cfg.from_preset) {
        const LimitModel lm = limit_equation(preset(parse_model_kind(cfg.preset), ModelParams::from_map(cfg.params)).first);
        if (!lm.has_canonical) throw std::runtime_error("preset has no canonical form: " + lm.diagnostic);
        q = lm.canonical.nonlinearity;
    }
    const FixedPointSearch fp = find_fixed_points(q, cfg.seed);
    rep.results["fixed_point_search"] = fp.report;
    at_least(rep, "fixed_points_found", static_cast<double>(fp.roots.size()), 1.0);
    if (!fp.found()) return;
    const Eigen::VectorXd z = fp.roots.front();
    rep.results["direction"] = std::vector<double>(z.data(), z.data() + z.size());
    at_most(rep, "fixed_point_residual", fp.residuals.front(), 1e-12);

    const Grid grid(cfg.n, cfg.length);
    const SechProfile profile{cfg.profile_amplitude, cfg.profile_width};
    at_most(rep, "ode_residual", soliton_ode_residual(q, z, Grid(cfg.residual_n, cfg.length), profile), 1e-8);

    SolitonSpec spec;
    spec.speed = cfg.speed;
    spec.direction = z;
    spec.profile = profile;
    spec.center = 0.5 * cfg.length;
    const RealField u0 = build_soliton(spec, grid);
    const KdvEquation eq = canonical_kdv(q);
    EvolveOptions o;
    o.t_final = cfg.t_final;
    o.dt = cfg.dt;
    o.snapshot_every = cadence(step_count(cfg.t_final, cfg.dt), cfg.snapshots);
    o.monitor_blowup = true;
    const Trajectory<double> tr = evolve_kdv(eq, u0, o);
    rep.counters["steps"] = tr.steps;
    rep.counters["snapshots"] = tr.snapshots.size();

    Series s{"soliton.csv", {"mass", "hamiltonian", "momentum", "max_gradient"}, {}};
    const ConservedQuantities c0 = conserved_quantities(eq, u0);
    double dh = 0.0, dm = 0.0, dp = 0.0;
    for (size_t n = 0; n < tr.snapshots.size(); ++n) {
        const ConservedQuantities c = conserved_quantities(eq, tr.snapshots[n]);
        s.rows.push_back({tr.times[n], c.mass, c.hamiltonian, c.momentum.norm(), max_gradient(tr.snapshots[n])});
        dh = std::max(dh, relative_drift(c.hamiltonian, c0.hamiltonian));
        dm = std::max(dm, relative_drift(c.mass, c0.mass));
        dp = std::max(dp, (c.momentum - c0.momentum).norm() / c0.momentum.norm());
    }
    flush(cfg, opts, s);

    const ShiftedError shape = shift_minimized_error(tr.snapshots.back(), u0);
    rep.results["shift"] = shape.shift;
    rep.results["status"] = tr.status;
    at_most(rep, "breakdown", tr.breakdown ? 1.0 : 0.0, 0.0);
    at_most(rep, "hamiltonian_drift", dh, 1e-8);
    at_most(rep, "mass_drift", dm, 1e-8);
    at_most(rep, "momentum_drift", dp, 1e-10);
    at_most(rep, "shape_error", shape.relative, 1e-4);
}

void run_miura(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentReport& rep)
{
    const bool scalar = cfg.miura_case == "scalar";
    // the scalar case is u_t = u_xxx - u u_x, i.e. Q(u,u) = u^2 / 2
    const Tensor3 q = scalar ? Tensor3::diagonal(1, 0.5) : complex_q_d2(cfg.d2_alpha, cfg.d2_beta);
    const double defect = miura_condition(q);
    at_most(rep, "miura_condition", defect, 1e-12);
    if (defect > 1e-10) {
        rep.results["crosscheck"] = "skipped: commutation condition violated";
        return;
    }
    const Grid grid(cfg.n, cfg.length);
    RealField v0(grid, q.dim());
    const Eigen::ArrayXd x = grid.points() * (2.0 * kPi * cfg.initial.mode / cfg.length);
    for (int c = 0; c < q.dim(); ++c)
        v0.values.col(c) = cfg.initial.amplitude * ((x + c).sin() + 0.5 * (2.0 * x - c).cos());

    const int every = cadence(step_count(cfg.t_final, cfg.dt), cfg.snapshots);
    const MiuraCheck mc = miura_crosscheck(q, v0, cfg.t_final, cfg.dt, every);
    rep.counters["steps"] = 2 * step_count(cfg.t_final, cfg.dt);
    Series s{"miura.csv", {"discrepancy"}, {}};
    for (size_t n = 0; n < mc.times.size(); ++n) s.rows.push_back({mc.times[n], mc.discrepancy[n]});
    flush(cfg, opts, s);
    at_most(rep, "crosscheck_discrepancy", mc.sup, scalar ? 1e-6 : 1e-5);
}

void run_hyperbolic(const ExperimentConfig& cfg, const RunOptions& opts, ExperimentReport& rep)
{
    const Tensor3 q = Tensor3::diagonal(1, cfg.hyperbolic_q);
    const KdvEquation eq = canonical_kdv(q, cfg.dispersion);
    const Grid grid(cfg.n, cfg.length);

    RealField u0(grid, 1);
    const bool soliton = cfg.initial.profile == "soliton";
    double oracle = std::numeric_limits<double>::quiet_NaN();
    if (soliton) {
        SolitonSpec s;
        s.speed = cfg.speed;
        s.direction = Eigen::VectorXd::Constant(1, 1.0 / cfg.hyperbolic_q);
        s.center = 0.5 * cfg.length;
        u0 = build_soliton(s, grid);
    } else {
        u0 = initial_field(cfg.initial, grid, 1);
        // characteristics of u_t + 2 q u u_x = 0 cross at t* = 1 / max(-2 q u0')
        const double steepest = (-2.0 * cfg.hyperbolic_q * spectral_derivative(u0, 1).values).maxCoeff();
        if (steepest > 0.0) oracle = 1.0 / steepest;
    }

    EvolveOptions o;
    o.t_final = cfg.t_final;
    o.dt = cfg.dt;
    o.snapshot_every = 1;
    o.monitor_blowup = true;
    const Trajectory<double> tr = evolve_kdv(eq, u0, o);
    const BlowupReport br = blowup_monitor(tr);
    rep.counters["steps"] = tr.steps;

    Series s{"hyperbolic.csv", {"max_gradient"}, {}};
    for (size_t n = 0; n < tr.snapshots.size(); ++n) s.rows.push_back({tr.times[n], max_gradient(tr.snapshots[n])});
    flush(cfg, opts, s);

    json fields = json::array();
    for (const auto& f : genuine_nonlinearity(q, Eigen::VectorXd::Ones(1)))
        fields.push_back({{"eigenvalue", f.eigenvalue}, {"nonlinearity", f.nonlinearity},
                          {"genuinely_nonlinear", f.status == CharacteristicField::Status::genuinely_nonlinear}});
    rep.results["characteristic_fields"] = fields;
    rep.results["breakdown"] = tr.breakdown;
    rep.results["breakdown_time"] = tr.breakdown_time;
    rep.results["oracle_time"] = oracle;
    rep.results["status"] = tr.status;

    if (cfg.dispersion == 0.0 && std::isfinite(oracle) && oracle < cfg.t_final) {
        at_least(rep, "breakdown_detected", tr.breakdown ? 1.0 : 0.0, 1.0);
        const double rel = tr.breakdown ? std::abs(tr.breakdown_time - oracle) / oracle : 1e300;
        at_most(rep, "breakdown_time_error", rel, 0.2);
    } else {
        at_most(rep, "breakdown", br.breakdown ? 1.0 : 0.0, 0.0);
    }
}

}  // namespace

std::string to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::kdv: return "kdv";
    case ExperimentKind::micro: return "micro";
    case ExperimentKind::converge: return "converge";
    case ExperimentKind::soliton: return "soliton";
    case ExperimentKind::miura: return "miura";
    case ExperimentKind::hyperbolic: return "hyperbolic";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name)
{
    for (ExperimentKind k : kKinds)
        if (to_string(k) == name) return k;
    throw ConfigError("experiment", "unknown experiment kind '" + name + "'");
}

const std::vector<ExperimentKind>& all_experiment_kinds() { return kKinds; }

ExperimentConfig ExperimentConfig::defaults(ExperimentKind kind)
{
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
    case ExperimentKind::kdv:
        c.preset = "ll_easy_plane";
        c.n = 128;
        c.length = 2.0 * kPi;
        c.t_final = 1.0;
        c.dt = 1e-3;
        c.initial = {"mode", 1.0, 2.0, 3};
        break;
    case ExperimentKind::micro:
        c.n = 256;
        c.length = 32.0;
        c.t_final = 0.1;
        break;
    case ExperimentKind::converge:
        c.n = 512;
        c.length = 64.0 * kPi;
        c.t_final = 0.5;
        c.eps_list = {0.2, 0.1, 0.05};
        break;
    case ExperimentKind::soliton:
        c.n = 512;
        c.length = 64.0 * kPi;
        c.t_final = 2.0;
        c.dt = 1e-3;
        break;
    case ExperimentKind::miura:
        c.n = 512;
        c.length = 16.0 * kPi;
        c.t_final = 0.5;
        c.dt = 1e-3;
        c.initial = {"mode", 1.0, 2.0, 1};
        break;
    case ExperimentKind::hyperbolic:
        c.n = 512;
        c.length = 2.0 * kPi;
        c.t_final = 1.0;
        c.dt = 1e-3;
        c.initial = {"sine", 1.0, 2.0, 1};
        break;
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const ExperimentKind* kind_hint)
{
    check_keys(j, "", {"experiment", "model", "grid", "time", "eps", "eps_list", "initial", "soliton", "miura",
                       "hyperbolic", "output_dir", "seed"});
    ExperimentKind kind;
    if (j.contains("experiment")) {
        if (!j.at("experiment").is_string()) throw ConfigError("experiment", "expected a string");
        kind = parse_experiment_kind(j.at("experiment").get<std::string>());
        if (kind_hint && *kind_hint != kind)
            throw ConfigError("experiment", "config is for '" + to_string(kind) + "', not '" + to_string(*kind_hint) + "'");
    } else if (kind_hint) {
        kind = *kind_hint;
    } else {
        throw ConfigError("experiment", "missing");
    }

    ExperimentConfig c = defaults(kind);
    if (j.contains("model")) {
        const json& m = j.at("model");
        check_keys(m, "model", {"preset", "params"});
        read(m, "model", "preset", c.preset);
        if (m.contains("params")) {
            check_keys(m.at("params"), "model.params", {"K", "alpha", "beta", "theta0", "lambda", "components", "quartic", "coupling"});
            c.params.clear();
            for (const auto& [key, v] : m.at("params").items()) read(m.at("params"), "model.params", key, c.params[key]);
        }
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, "grid", {"n", "length"});
        read(g, "grid", "n", c.n);
        read(g, "grid", "length", c.length);
    }
    if (j.contains("time")) {
        const json& t = j.at("time");
        check_keys(t, "time", {"t_final", "dt", "snapshots"});
        read(t, "time", "t_final", c.t_final);
        read(t, "time", "dt", c.dt);
        read(t, "time", "snapshots", c.snapshots);
    }
    read(j, "", "eps", c.eps);
    if (j.contains("eps_list")) {
        const json& e = j.at("eps_list");
        if (!e.is_array()) throw ConfigError("eps_list", "expected an array");
        c.eps_list.clear();
        for (const auto& v : e) {
            if (!v.is_number()) throw ConfigError("eps_list", "expected numbers");
            c.eps_list.push_back(v.get<double>());
        }
    }
    if (j.contains("initial")) {
        const json& i = j.at("initial");
        check_keys(i, "initial", {"profile", "amplitude", "width", "mode"});
        read(i, "initial", "profile", c.initial.profile);
        read(i, "initial", "amplitude", c.initial.amplitude);
        read(i, "initial", "width", c.initial.width);
        read(i, "initial", "mode", c.initial.mode);
    }
    if (j.contains("soliton")) {
        const json& s = j.at("soliton");
        check_keys(s, "soliton", {"q", "from_preset", "speed", "amplitude", "width", "residual_n"});
        read(s, "soliton", "q", c.soliton_q);
        read(s, "soliton", "from_preset", c.from_preset);
        read(s, "soliton", "speed", c.speed);
        read(s, "soliton", "amplitude", c.profile_amplitude);
        read(s, "soliton", "width", c.profile_width);
        read(s, "soliton", "residual_n", c.residual_n);
    }
    if (j.contains("miura")) {
        const json& m = j.at("miura");
        check_keys(m, "miura", {"case", "d2_alpha", "d2_beta"});
        read(m, "miura", "case", c.miura_case);
        read(m, "miura", "d2_alpha", c.d2_alpha);
        read(m, "miura", "d2_beta", c.d2_beta);
    }
    if (j.contains("hyperbolic")) {
        const json& h = j.at("hyperbolic");
        check_keys(h, "hyperbolic", {"dispersion", "q"});
        read(h, "hyperbolic", "dispersion", c.dispersion);
        read(h, "hyperbolic", "q", c.hyperbolic_q);
    }
    read(j, "", "output_dir", c.output_dir);
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
        c.seed = j.at("seed").get<std::uint64_t>();
    }
    c.validate();
    return c;
}

void ExperimentConfig::validate() const
{
    try {
        ModelParams::from_map(params);
        parse_model_kind(preset);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("model", e.what());
    }
    if (!is_power_of_two(n) || n < 8) throw ConfigError("grid.n", "must be a power of two, at least 8");
    if (!(length > 0.0)) throw ConfigError("grid.length", "must be positive");
    if (!(t_final > 0.0)) throw ConfigError("time.t_final", "must be positive");
    if (!(dt >= 0.0)) throw ConfigError("time.dt", "must be non-negative");
    const bool micro_like = kind == ExperimentKind::micro || kind == ExperimentKind::converge;
    if (!micro_like && !(dt > 0.0)) throw ConfigError("time.dt", "must be positive for this experiment");
    if (snapshots < 1) throw ConfigError("time.snapshots", "must be positive");
    if (!(eps > 0.0 && eps <= 1.0)) throw ConfigError("eps", "must lie in (0, 1]");
    if (kind == ExperimentKind::converge && eps_list.empty()) throw ConfigError("eps_list", "must not be empty");
    for (size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0 && eps_list[i] <= 1.0)) throw ConfigError("eps_list", "entries must lie in (0, 1]");
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw ConfigError("eps_list", "must be strictly decreasing");
    }
    const std::set<std::string> profiles = kind == ExperimentKind::hyperbolic
                                               ? std::set<std::string>{"sech", "mode", "sine", "soliton"}
                                               : std::set<std::string>{"sech", "mode", "sine"};
    if (!profiles.count(initial.profile)) throw ConfigError("initial.profile", "unknown profile '" + initial.profile + "'");
    if (!std::isfinite(initial.amplitude)) throw ConfigError("initial.amplitude", "must be finite");
    if (!(initial.width > 0.0)) throw ConfigError("initial.width", "must be positive");
    if (initial.mode < 1) throw ConfigError("initial.mode", "must be positive");
    if (soliton_q == 0.0) throw ConfigError("soliton.q", "must be nonzero");
    if (!(speed > 0.0)) throw ConfigError("soliton.speed", "must be positive");
    if (!(profile_width > 0.0)) throw ConfigError("soliton.width", "must be positive");
    if (!is_power_of_two(residual_n) || residual_n < 8) throw ConfigError("soliton.residual_n", "must be a power of two, at least 8");
    if (miura_case != "scalar" && miura_case != "d2") throw ConfigError("miura.case", "expected 'scalar' or 'd2'");
    if (!(dispersion >= 0.0)) throw ConfigError("hyperbolic.dispersion", "must be non-negative");
    if (hyperbolic_q == 0.0) throw ConfigError("hyperbolic.q", "must be nonzero");
    if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

json ExperimentConfig::to_json() const
{
    json j;
    j["experiment"] = to_string(kind);
    j["model"] = {{"preset", preset}, {"params", params}};
    j["grid"] = {{"n", n}, {"length", length}};
    j["time"] = {{"t_final", t_final}, {"dt", dt}, {"snapshots", snapshots}};
    j["eps"] = eps;
    j["eps_list"] = eps_list;
    j["initial"] = {{"profile", initial.profile}, {"amplitude", initial.amplitude}, {"width", initial.width}, {"mode", initial.mode}};
    j["soliton"] = {{"q", soliton_q}, {"from_preset", from_preset}, {"speed", speed}, {"amplitude", profile_amplitude}, {"width", profile_width}, {"residual_n", residual_n}};
    j["miura"] = {{"case", miura_case}, {"d2_alpha", complex_json(d2_alpha)}, {"d2_beta", complex_json(d2_beta)}};
    j["hyperbolic"] = {{"dispersion", dispersion}, {"q", hyperbolic_q}};
    j["output_dir"] = output_dir;
    j["seed"] = seed;
    return j;
}

bool ExperimentReport::all_pass() const
{
    if (assertions.empty()) return false;
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

json ExperimentReport::summary() const
{
    json a = json::array();
    for (const auto& x : assertions)
        a.push_back({{"name", x.name}, {"value", x.value}, {"threshold", x.threshold}, {"pass", x.pass}});
    json j;
    j["experiment"] = experiment;
    j["config_echo"] = config_echo;
    j["status"] = status;
    j["pass"] = all_pass();
    j["assertions"] = a;
    j["results"] = results;
    j["timings"] = counters;
    return j;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opts)
{
    cfg.validate();
    ExperimentReport rep;
    rep.experiment = to_string(cfg.kind);
    rep.config_echo = cfg.to_json();

    const auto start = std::chrono::steady_clock::now();
    try {
        switch (cfg.kind) {
        case ExperimentKind::kdv: run_kdv(cfg, opts, rep); break;
        case ExperimentKind::micro: run_micro(cfg, opts, rep); break;
        case ExperimentKind::converge: run_converge(cfg, opts, rep); break;
        case ExperimentKind::soliton: run_soliton(cfg, opts, rep); break;
        case ExperimentKind::miura: run_miura(cfg, opts, rep); break;
        case ExperimentKind::hyperbolic: run_hyperbolic(cfg, opts, rep); break;
        }
    } catch (const std::exception& e) {
        rep.status = std::string("aborted: ") + e.what();
        rep.assertions.push_back({"completed", 0.0, 1.0, false});
    }
    rep.wall["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (opts.write_files) {
        std::filesystem::create_directories(cfg.output_dir);
        const std::filesystem::path dir(cfg.output_dir);
        write_text((dir / "summary.json").string(), rep.summary().dump(2) + "\n");
        write_text((dir / "timings.json").string(), rep.wall.dump(2) + "\n");
    }
    return rep;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn)
{
    if (count <= 0) return;
    if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, count);
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto work = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit_series(const std::string& path, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows)
{
    std::string out = "t";
    for (const auto& c : columns) out += "," + c;
    out += "\n";
    for (const auto& r : rows) {
        if (r.size() != columns.size() + 1) throw std::invalid_argument("emit_series: ragged row");
        for (size_t i = 0; i < r.size(); ++i) {
            if (i) out += ",";
            out += format_number(r[i]);
        }
        out += "\n";
    }
    write_text(path, out);
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    f.close();
    if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace lwkdv
