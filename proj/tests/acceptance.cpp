// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.

#include "lwkdv/analysis.hpp"
#include "lwkdv/experiment.hpp"
#include "lwkdv/hydro.hpp"
#include "lwkdv/kdv.hpp"
#include "lwkdv/micro.hpp"
#include "lwkdv/models.hpp"
#include "lwkdv/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace lwkdv;
using nlohmann::json;

namespace {

const double kPi = std::numbers::pi;

// Criteria that cannot pass as stated; see README. They still print FAIL.
const std::set<int> kExpectedFailures = {4};

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v)
{
    char b[32];
    std::snprintf(b, sizeof b, "%.3e", v);
    return b;
}

RealField zero_mean_sech(const Grid& g, double amp, int dim)
{
    RealField a(g, dim);
    for (int k = 0; k < dim; ++k)
        a.values.col(k) = amp * ((g.points() - 0.5 * g.length() - 2.0 * k) / 2.0).cosh().inverse().square();
    a.values.rowwise() -= a.values.colwise().mean();
    return a;
}

// ---- 1 ----------------------------------------------------------------------
Outcome coefficients()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream d;
    bool ok = true;

    const double gp = limit_equation(preset(ModelKind::gp_scalar).first).raw_nonlinearity(0, 0, 0);
    ok &= std::abs(gp + 3.0) <= 1e-12;
    d << "GP " << gp;

    double flat = 0.0;
    for (ModelKind k : {ModelKind::ll_easy_plane, ModelKind::af_chain})
        flat = std::max(flat, limit_equation(preset(k).first).raw_nonlinearity.frobenius());
    ok &= flat <= 1e-12;
    d << ", plane/AF |Q| " << fmt(flat);

    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(0.2, 3.0), ub(-2.0, 2.0), ut(0.2, 2.9);
    double cone = 0.0;
    for (int i = 0; i < 10; ++i) {
        ModelParams p;
        p.alpha = ua(rng);
        p.beta = ub(rng);
        p.theta0 = ut(rng);
        const double s = std::sin(p.theta0), c = std::cos(p.theta0);
        const double lambda = p.alpha * s * s;
        const double b = p.alpha * s * c + p.beta * s * s * s;
        const double expected = 1.5 * c / s + 3.0 * b / (2.0 * lambda);
        const double got = limit_equation(preset(ModelKind::ll_easy_cone, p).first).raw_nonlinearity(0, 0, 0);
        cone = std::max(cone, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
    }
    ok &= cone <= 1e-12;
    d << ", cone err " << fmt(cone);

    const ModelParams p = ModelParams::from_map({{"lambda", 2.5}, {"components", 3}, {"coupling", 0.4}});
    const Tensor3 raw = limit_equation(preset(ModelKind::gp_coupled, p).first).raw_nonlinearity;
    double coupled = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const double expected = (i == j && j == k ? -1.5 : 0.0) - p.f1(i, j, k) / (2.0 * 2.5);
                coupled = std::max(coupled, std::abs(raw(i, j, k) - expected));
            }
    ok &= coupled <= 1e-12;
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok &= secs < 1.0;
    d << ", coupled err " << fmt(coupled) << ", " << fmt(secs) << " s";
    return {ok, d.str()};
}

// ---- 2 ----------------------------------------------------------------------
Outcome dispersion()
{
    double worst = 0.0;
    for (ModelKind kind : {ModelKind::ll_easy_plane, ModelKind::af_chain}) {
        const LimitModel lm = limit_equation(preset(kind).first);
        const Grid g(128, 2.0 * kPi);
        const int dim = lm.dim;
        for (int mode : {1, 5, 20}) {
            RealField u0(g, dim);
            for (int c = 0; c < dim; ++c) u0.values.col(c) = (mode * g.points() + c).cos();
            EvolveOptions o;
            o.t_final = 1.0;
            o.dt = 1e-3;
            o.snapshot_every = 100;
            const auto tr = evolve_kdv(lm.raw, u0, o);
            const double k = mode, w = -k * k * k / (8.0 * lm.sound_speed);
            for (size_t n = 0; n < tr.snapshots.size(); ++n)
                for (int c = 0; c < dim; ++c)
                    worst = std::max(worst, (tr.snapshots[n].values.col(c) - (k * g.points() + c + w * tr.times[n]).cos())
                                                .abs()
                                                .maxCoeff());
        }
    }
    return {worst <= 1e-10, "max phase error " + fmt(worst) + " (tol 1e-10)"};
}

// ---- 3 ----------------------------------------------------------------------
Outcome conservation()
{
    const Grid g(512, 64.0 * kPi);
    const Tensor3 q = Tensor3::diagonal(1, 1.0);
    const FixedPointSearch fp = find_fixed_points(q, 1);
    if (!fp.found()) return {false, "no fixed point: " + fp.report};
    SolitonSpec s;
    s.direction = fp.roots.front();
    s.center = 0.5 * g.length();
    const RealField u0 = build_soliton(s, g);
    const KdvEquation eq = canonical_kdv(q);
    EvolveOptions o;
    o.t_final = 2.0;
    o.dt = 1e-3;
    o.snapshot_every = 100;
    const auto tr = evolve_kdv(eq, u0, o);
    const ConservedQuantities c0 = conserved_quantities(eq, u0);
    double dh = 0.0, dm = 0.0, dp = 0.0;
    for (const auto& u : tr.snapshots) {
        const ConservedQuantities c = conserved_quantities(eq, u);
        dh = std::max(dh, std::abs(c.hamiltonian - c0.hamiltonian) / std::abs(c0.hamiltonian));
        dm = std::max(dm, std::abs(c.mass - c0.mass) / c0.mass);
        dp = std::max(dp, (c.momentum - c0.momentum).norm() / c0.momentum.norm());
    }
    const double shape = shift_minimized_error(tr.snapshots.back(), u0).relative;
    const bool ok = !tr.breakdown && dh <= 1e-8 && dm <= 1e-8 && dp <= 1e-10 && shape <= 1e-4;
    return {ok, "H " + fmt(dh) + ", M " + fmt(dm) + ", P " + fmt(dp) + ", shape " + fmt(shape)};
}

// ---- 4 ----------------------------------------------------------------------
Outcome soliton_profile()
{
    const Grid g(1024, 64.0 * kPi);
    const Tensor3 q = Tensor3::diagonal(1, 1.0);
    const FixedPointSearch fp = find_fixed_points(q, 1);
    if (!fp.found()) return {false, "no fixed point: " + fp.report};
    const Eigen::VectorXd z = fp.roots.front();
    const double stated = soliton_ode_residual(q, z, g, SechProfile{-3.0, 1.0});
    const double control = soliton_ode_residual(q, z, g, SechProfile{-2.0, 1.0});
    const double exact = soliton_ode_residual(q, z, g, SechProfile{-1.5, 0.5});
    const bool control_rejected = control > 0.1;
    std::ostringstream d;
    d << "-3 sech^2(x) residual " << fmt(stated) << " (tol 1e-8); control -2 sech^2 " << fmt(control)
      << (control_rejected ? " rejected" : " NOT rejected") << "; -(3/2) sech^2(x/2) residual " << fmt(exact);
    return {stated <= 1e-8 && control_rejected, d.str()};
}

// ---- 5 ----------------------------------------------------------------------
Outcome miura()
{
    const Grid g(512, 16.0 * kPi);
    RealField v0(g, 1);
    const Eigen::ArrayXd x = g.points() * (2.0 * kPi / g.length());
    v0.values.col(0) = x.sin() + 0.5 * (2.0 * x).cos();
    const double scalar = miura_crosscheck(Tensor3::diagonal(1, 0.5), v0, 0.5, 1e-3, 100).sup;

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> arg(0.0, 2.0 * kPi), mod(0.3, 2.0), ratio(1.2, 2.0);
    double worst_equal = 0.0, least_unequal = 1e300;
    for (int i = 0; i < 20; ++i) {
        const double r = mod(rng);
        worst_equal = std::max(worst_equal, miura_condition(complex_q_d2(std::polar(r, arg(rng)), std::polar(r, arg(rng)))));
        const double f = i % 2 ? ratio(rng) : 1.0 / ratio(rng);
        least_unequal =
            std::min(least_unequal, miura_condition(complex_q_d2(std::polar(r, arg(rng)), std::polar(f * r, arg(rng)))));
    }
    const bool ok = scalar <= 1e-6 && worst_equal <= 1e-12 && least_unequal > 1e-3;
    return {ok, "scalar crosscheck " + fmt(scalar) + ", |a|=|b| defect " + fmt(worst_equal) + ", |a|!=|b| min defect " +
                    fmt(least_unequal)};
}

// ---- 6, 7 -------------------------------------------------------------------
json converge_runs(const std::string& preset_name)
{
    ExperimentConfig c = ExperimentConfig::defaults(ExperimentKind::converge);
    c.preset = preset_name;
    c.n = 512;
    c.length = 64.0 * kPi;
    c.t_final = 0.5;
    c.eps_list = {0.2, 0.1, 0.05};
    c.initial = {"sech", 0.3, 2.0, 1};
    RunOptions o;
    o.write_files = false;
    const ExperimentReport r = run_experiment(c, o);
    if (r.status != "ok") throw std::runtime_error(r.status);
    return r.results["runs"];
}

std::map<std::string, json> g_runs;

const json& runs_for(const std::string& preset_name)
{
    if (!g_runs.count(preset_name)) g_runs[preset_name] = converge_runs(preset_name);
    return g_runs[preset_name];
}

bool strictly_decreasing(const json& runs, const char* key, std::string& seq)
{
    bool ok = true;
    for (size_t i = 0; i < runs.size(); ++i) {
        seq += (i ? " > " : "") + fmt(runs[i][key].get<double>());
        if (i && !(runs[i][key].get<double>() < runs[i - 1][key].get<double>())) ok = false;
    }
    return ok;
}

Outcome convergence()
{
    std::ostringstream d;
    bool ok = true;
    for (const char* name : {"gp_scalar", "ll_easy_plane"}) {
        const json& runs = runs_for(name);
        for (const auto& r : runs)
            if (r["status"] != "ok") return {false, std::string(name) + ": " + r["status"].get<std::string>()};
        std::string amp, phase, w;
        ok &= strictly_decreasing(runs, "sup_amplitude_error", amp);
        ok &= strictly_decreasing(runs, "sup_phase_error", phase);
        ok &= strictly_decreasing(runs, "sup_w_norm", w);
        double chart = 0.0;
        for (const auto& r : runs) chart = std::max(chart, r["sup_phase"].get<double>());
        ok &= chart < kChartRadius;
        d << name << ": amplitude " << amp << "; phase " << phase << "; W " << w << "; eps|phi| " << fmt(chart) << ". ";
    }
    return {ok, d.str()};
}

Outcome almost_conservation()
{
    const json& runs = runs_for("gp_scalar");
    const double d0 = runs[0]["hamiltonian_drift"].get<double>();
    const double d1 = runs[1]["hamiltonian_drift"].get<double>();
    return {d1 <= 0.75 * d0, "drift(0.2) " + fmt(d0) + ", drift(0.1) " + fmt(d1) + ", ratio " + fmt(d1 / d0) + " (tol 0.75)"};
}

// ---- 8 ----------------------------------------------------------------------
Outcome hydro()
{
    auto [geo, spec] = preset(ModelKind::gp_scalar);
    const Grid g(128, 32.0);
    double full[2], bare[2];
    int i = 0;
    for (double eps : {0.2, 0.1}) {
        MicroOptions o;
        o.t_final = 0.02;
        o.dt = eps * eps / 50.0;
        o.snapshot_every = 1;
        o.splitting_order = 4;
        const MicroTrajectory m = evolve_micro(spec, well_prepared_init(spec, geo, zero_mean_sech(g, 0.3, 1), eps), o);
        if (m.aborted) return {false, "micro run aborted"};
        const auto h = extract_trajectory(spec, m.states);
        full[i] = hydro_residual(geo, m.times, h).max_combined;
        bare[i] = hydro_residual(geo, m.times, h, false).max_combined;
        ++i;
    }
    const bool ok = full[1] <= 0.75 * full[0] && bare[0] >= 10.0 * full[0] && bare[1] >= 10.0 * full[1];
    return {ok, "residual " + fmt(full[0]) + " -> " + fmt(full[1]) + ", ablated " + fmt(bare[0]) + " -> " + fmt(bare[1])};
}

// ---- 9 ----------------------------------------------------------------------
Outcome structure()
{
    double spin = 0.0, mass = 0.0;
    const Grid g(256, 64.0);
    for (ModelKind kind : {ModelKind::ll_easy_plane, ModelKind::ll_easy_cone, ModelKind::af_chain, ModelKind::gp_scalar,
                           ModelKind::gp_coupled}) {
        auto [geo, spec] = preset(kind);
        for (double eps : {0.2, 0.1}) {
            const MicroState s0 = well_prepared_init(spec, geo, zero_mean_sech(g, 0.3, geo.dim), eps);
            MicroOptions o;
            o.t_final = 0.2;
            o.snapshot_every = 50;
            const MicroTrajectory m = evolve_micro(spec, s0, o);
            if (m.aborted) return {false, to_string(kind) + " aborted"};
            if (spec.is_gp()) {
                const double m0 = micro_invariants(spec, s0).mass;
                for (const auto& s : m.states) mass = std::max(mass, std::abs(micro_invariants(spec, s).mass - m0) / m0);
            } else {
                spin = std::max(spin, m.max_norm_deviation);
            }
        }
    }
    // the convergence sweeps count too
    for (const auto& r : runs_for("gp_scalar")) mass = std::max(mass, r["structure_drift"].get<double>());
    for (const auto& r : runs_for("ll_easy_plane")) spin = std::max(spin, r["structure_drift"].get<double>());
    return {spin <= 1e-10 && mass <= 1e-10, "max ||Gamma|-1| " + fmt(spin) + ", GP mass drift " + fmt(mass)};
}

// ---- 10 ---------------------------------------------------------------------
Outcome hyperbolic()
{
    const Tensor3 q = Tensor3::diagonal(1, 1.0);
    const Grid g(512, 2.0 * kPi);
    RealField u0(g, 1);
    u0.values.col(0) = g.points().sin();
    // u_t + 2 u u_x = 0: characteristics cross at 1 / max(-2 u0') = 1/2
    const double oracle = 1.0 / (-2.0 * spectral_derivative(u0, 1).values).maxCoeff();
    EvolveOptions o;
    o.t_final = 1.0;
    o.dt = 1e-3;
    o.monitor_blowup = true;
    const auto burgers = evolve_kdv(canonical_kdv(q, 0.0), u0, o);
    const double rel = burgers.breakdown ? std::abs(burgers.breakdown_time - oracle) / oracle : 1e300;

    const Grid gs(512, 64.0 * kPi);
    SolitonSpec s;
    s.direction = Eigen::VectorXd::Ones(1);
    s.center = 0.5 * gs.length();
    EvolveOptions os = o;
    os.t_final = 2.0;
    const auto sol = evolve_kdv(canonical_kdv(q, 1.0), build_soliton(s, gs), os);
    const bool ok = burgers.breakdown && rel <= 0.2 && !sol.breakdown;
    return {ok, "detected " + fmt(burgers.breakdown_time) + " vs oracle " + fmt(oracle) + " (rel " + fmt(rel) +
                    ", tol 0.2); dispersive soliton breakdown: " + (sol.breakdown ? "yes" : "no")};
}

// ---- 11 ---------------------------------------------------------------------
std::map<std::string, std::string> artifacts(const ExperimentConfig& c, int workers)
{
    std::filesystem::remove_all(c.output_dir);
    RunOptions o;
    o.workers = workers;
    run_experiment(c, o);
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(c.output_dir)) {
        if (e.path().filename() == "timings.json") continue;
        std::ifstream f(e.path(), std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        files[e.path().filename().string()] = s.str();
    }
    return files;
}

Outcome determinism()
{
    const std::string dir = (std::filesystem::temp_directory_path() / "lwkdv_acceptance_determinism").string();
    ExperimentConfig conv = ExperimentConfig::defaults(ExperimentKind::converge);
    conv.n = 128;
    conv.length = 32.0;
    conv.t_final = 0.05;
    conv.eps_list = {0.3, 0.2, 0.1};
    conv.output_dir = dir;
    ExperimentConfig sol = ExperimentConfig::defaults(ExperimentKind::soliton);
    sol.t_final = 0.2;
    sol.seed = 7;
    sol.output_dir = dir;

    const auto serial = artifacts(conv, 1);
    const auto parallel = artifacts(conv, 4);
    const auto again = artifacts(conv, 4);
    const auto s1 = artifacts(sol, 0);
    const auto s2 = artifacts(sol, 0);
    std::filesystem::remove_all(dir);
    const bool ok = serial == parallel && parallel == again && s1 == s2 && serial.count("summary.json") && s1.count("summary.json");
    return {ok, std::to_string(serial.size() + s1.size()) + " artifacts compared byte-wise, serial vs parallel vs repeat"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"model coefficients", coefficients},
        {"dispersion exactness", dispersion},
        {"soliton conservation", conservation},
        {"soliton profile residual", soliton_profile},
        {"Miura transform", miura},
        {"long-wave convergence", convergence},
        {"almost-conservation of H", almost_conservation},
        {"hydrodynamic residual", hydro},
        {"structure preservation", structure},
        {"hyperbolic breakdown", hyperbolic},
        {"determinism", determinism},
    };

    int passed = 0, unexpected = 0;
    for (size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool expected_fail = kExpectedFailures.count(id) > 0;
        passed += r.pass;
        if (r.pass == expected_fail) ++unexpected;
        std::printf("[%2d] %s %s: %s [%.1f s]%s\n", id, r.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    r.detail.c_str(), secs, expected_fail ? (r.pass ? " (expected FAIL, now passes)" : " (expected)") : "");
        std::fflush(stdout);
    }
    std::printf("acceptance: %d of %zu criteria pass; %d unexpected outcome(s)\n", passed, criteria.size(), unexpected);
    return unexpected == 0 ? 0 : 1;
}
