#include "lwkdv/analysis.hpp"

#include "lwkdv/integrators.hpp"
#include "lwkdv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lwkdv {

double SechProfile::operator()(double xi) const
{
    const double s = 1.0 / std::cosh(width * xi);
    return amplitude * s * s;
}

namespace {

Eigen::VectorXd fixed_point_map(const Tensor3& q, const Eigen::VectorXd& z)
{
    return q.apply(z, z) - z;
}

Eigen::MatrixXd fixed_point_jacobian(const Tensor3& q, const Eigen::VectorXd& z)
{
    const int d = q.dim();
    Eigen::MatrixXd j = q.partial(z) - Eigen::MatrixXd::Identity(d, d);
    for (int i = 0; i < d; ++i) j.col(i) += q.apply(Eigen::VectorXd::Unit(d, i), z);
    return j;
}

// Exact root along the ray through y when y is an eigendirection of z -> Q(z,z).
bool ray_scaled(const Tensor3& q, const Eigen::VectorXd& y, Eigen::VectorXd& out)
{
    const double s = q.apply(y, y).dot(y);
    if (std::abs(s) < 1e-12 * std::pow(y.norm(), 3)) return false;
    out = (y.squaredNorm() / s) * y;
    return true;
}

}  // namespace

bool newton_fixed_point(const Tensor3& q, Eigen::VectorXd& z, double tol, int max_iter)
{
    Eigen::VectorXd f = fixed_point_map(q, z);
    double r = f.norm();
    for (int it = 0; it < max_iter; ++it) {
        if (!std::isfinite(r)) return false;
        if (r <= tol) return true;
        const Eigen::VectorXd step = fixed_point_jacobian(q, z).completeOrthogonalDecomposition().solve(-f);
        double a = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, a *= 0.5) {
            const Eigen::VectorXd trial = z + a * step;
            const Eigen::VectorXd ft = fixed_point_map(q, trial);
            if (ft.norm() < (1.0 - 1e-4 * a) * r) {
                z = trial;
                f = ft;
                r = ft.norm();
                accepted = true;
                break;
            }
        }
        if (!accepted) return r <= tol;
    }
    return r <= tol;
}

FixedPointSearch find_fixed_points(const Tensor3& q, std::uint64_t seed, int random_starts)
{
    const int d = q.dim();
    if (q.max_abs() == 0.0) throw std::invalid_argument("zero nonlinearity has no nonzero fixed point");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<Eigen::VectorXd> starts;
    Eigen::VectorXd scaled;
    for (int s = 0; s < random_starts; ++s) {
        Eigen::VectorXd y(d);
        for (int i = 0; i < d; ++i) y(i) = gauss(rng);
        y.normalize();
        starts.push_back(y);
        if (ray_scaled(q, y, scaled)) starts.push_back(scaled);
    }
    // eigenvectors of the flux Jacobian at a few base points
    std::vector<Eigen::VectorXd> bases;
    for (int i = 0; i < d; ++i) bases.push_back(Eigen::VectorXd::Unit(d, i));
    bases.push_back(Eigen::VectorXd::Ones(d) / std::sqrt(double(d)));
    for (const auto& b : bases) {
        const Eigen::MatrixXd m = q.partial(b);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m + m.transpose());
        for (int i = 0; i < d; ++i)
            if (ray_scaled(q, es.eigenvectors().col(i), scaled)) starts.push_back(scaled);
    }

    std::vector<Eigen::VectorXd> ends(starts.size());
    std::vector<char> ok(starts.size(), 0);
    const int workers = std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), 8));
    std::vector<std::future<void>> jobs;
    for (int w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (size_t i = w; i < starts.size(); i += workers) {
                Eigen::VectorXd z = starts[i];
                ok[i] = newton_fixed_point(q, z);
                ends[i] = z;
            }
        }));
    }
    for (auto& j : jobs) j.get();

    FixedPointSearch out;
    out.starts = static_cast<int>(starts.size());
    for (size_t i = 0; i < starts.size(); ++i) {
        if (!ok[i]) continue;
        ++out.converged;
        const Eigen::VectorXd& z = ends[i];
        if (z.norm() < 1e-8) continue;
        bool dup = false;
        for (const auto& r : out.roots) dup = dup || (r - z).norm() < 1e-8;
        if (dup) continue;
        out.roots.push_back(z);
        out.residuals.push_back(fixed_point_map(q, z).norm());
    }
    std::ostringstream msg;
    msg << out.converged << " of " << out.starts << " starts converged, " << out.roots.size() << " distinct nonzero roots";
    out.report = msg.str();
    return out;
}

RealField build_soliton(const SolitonSpec& spec, const Grid& grid)
{
    if (!(spec.speed > 0.0)) throw std::invalid_argument("soliton speed must be positive");
    if (spec.direction.size() < 1) throw std::invalid_argument("soliton direction is empty");
    const double l = grid.length();
    const double rc = std::sqrt(spec.speed);
    const double tail = spec.speed * std::abs(spec.profile(rc * 0.5 * l)) * spec.direction.norm();
    if (tail > 1e-12) throw std::invalid_argument("domain too short: soliton tail is not negligible at the boundary");

    RealField u(grid, static_cast<int>(spec.direction.size()));
    const Eigen::ArrayXd x = grid.points();
    for (int j = 0; j < grid.size(); ++j) {
        double y = x(j) - spec.center;
        y -= l * std::round(y / l);
        u.values.row(j) = spec.speed * spec.profile(rc * y) * spec.direction.transpose().array();
    }
    return u;
}

double profile_ode_residual(const Tensor3& q, const RealField& p, double speed)
{
    RealField r = speed * spectral_derivative(p, 1) - spectral_derivative(p, 3);
    r += spectral_derivative(q_apply(q, p, p), 1);
    return l2_norm(r);
}

double soliton_ode_residual(const Tensor3& q, const Eigen::VectorXd& z, const Grid& grid, const SechProfile& profile)
{
    SolitonSpec s;
    s.direction = z;
    s.profile = profile;
    s.center = 0.5 * grid.length();
    return profile_ode_residual(q, build_soliton(s, grid), 1.0);
}

double miura_condition(const Tensor3& q)
{
    const int d = q.dim();
    double worst = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const Eigen::VectorXd ei = Eigen::VectorXd::Unit(d, i);
                const Eigen::VectorXd ej = Eigen::VectorXd::Unit(d, j);
                const Eigen::VectorXd ek = Eigen::VectorXd::Unit(d, k);
                worst = std::max(worst, (q.apply(ei, q.apply(ej, ek)) - q.apply(ej, q.apply(ei, ek))).norm());
            }
    return worst;
}

RealField miura_map(const Tensor3& q, const RealField& v)
{
    return spectral_derivative(v, 1) + (1.0 / 3.0) * q_apply(q, v, v);
}

RealField mkdv_nonlinear_rhs(const Tensor3& q, const RealField& v)
{
    const int m = 2 * v.grid.size();
    const Samples<double> fv = upsample(v, m);
    const Samples<double> fx = upsample(spectral_derivative(v, 1), m);
    const Samples<double> inner = apply_pointwise(q, fv, fx);
    return (-2.0 / 3.0) * downsample(v.grid, apply_pointwise(q, fv, inner));
}

Trajectory<double> evolve_mkdv(const Tensor3& q, const RealField& v0, const EvolveOptions& opts)
{
    if (!(std::abs(opts.dt) > 0.0) || !std::isfinite(opts.t_final)) throw std::invalid_argument("bad time step");
    if (v0.dim() != q.dim()) throw std::invalid_argument("field dimension does not match nonlinearity");
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(std::abs(opts.t_final) / std::abs(opts.dt) - 1e-9)));
    const double h = opts.t_final / steps;

    const DiagonalOperator lin(v0.grid, [](double k) { return Complex(0.0, -k * k * k); });
    auto propagate = [&](const RealField& v, double tau) { return lin.propagate(v, tau); };
    auto rhs = [&](const RealField& v) { return mkdv_nonlinear_rhs(q, v); };

    Trajectory<double> traj;
    traj.times.push_back(0.0);
    traj.snapshots.push_back(v0);
    RealField v = v0;
    for (long n = 1; n <= steps; ++n) {
        try {
            v = ifrk4_step(v, propagate, rhs, h);
        } catch (const StepRejected&) {
            traj.breakdown = true;
            traj.breakdown_time = n * h;
            traj.status = "step rejected";
            traj.steps = n;
            return traj;
        }
        traj.steps = n;
        if (n == steps || (opts.snapshot_every > 0 && n % opts.snapshot_every == 0)) {
            traj.times.push_back(n * h);
            traj.snapshots.push_back(v);
        }
    }
    return traj;
}

MiuraCheck miura_crosscheck(const Tensor3& q, const RealField& v0, double t_final, double dt, int snapshot_every)
{
    const double defect = miura_condition(q);
    if (defect > 1e-10) {
        std::ostringstream msg;
        msg << "nonlinearity violates the Miura commutation condition (defect " << defect << ")";
        throw std::invalid_argument(msg.str());
    }
    EvolveOptions o;
    o.t_final = t_final;
    o.dt = dt;
    o.snapshot_every = snapshot_every;
    const Trajectory<double> vt = evolve_mkdv(q, v0, o);
    const Trajectory<double> ut = evolve_kdv(canonical_kdv(q), miura_map(q, v0), o);
    if (vt.breakdown || ut.breakdown) throw std::runtime_error("Miura crosscheck run broke down");

    MiuraCheck c;
    for (size_t n = 0; n < vt.snapshots.size(); ++n) {
        c.times.push_back(vt.times[n]);
        c.discrepancy.push_back(l2_norm(miura_map(q, vt.snapshots[n]) - ut.snapshots[n]));
        c.sup = std::max(c.sup, c.discrepancy.back());
    }
    return c;
}

Tensor3 complex_q_d2(Complex alpha, Complex beta)
{
    const Complex basis[2] = {Complex(1.0, 0.0), Complex(0.0, 1.0)};
    Tensor3 t(2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const Complex x = basis[i], y = basis[j];
            const Complex v = alpha * x * y + beta * std::conj(x * y) + std::conj(alpha) * (std::conj(x) * y + x * std::conj(y));
            t(i, j, 0) = v.real();
            t(i, j, 1) = v.imag();
        }
    return t;
}

ShiftedError shift_minimized_error(const RealField& u, const RealField& ref)
{
    u.check_compatible(ref);
    const Grid& g = ref.grid;
    const int n = g.size();
    const Samples<Complex> su = to_spectrum(u);
    const Samples<Complex> sr = to_spectrum(ref);
    Eigen::ArrayXcd a = Eigen::ArrayXcd::Zero(n);
    for (int c = 0; c < u.dim(); ++c) a += su.col(c) * sr.col(c).conjugate();

    // correlation at grid shifts s_j = j dx
    const Eigen::ArrayXcd corr = fft_inverse(a);
    int best = 0;
    for (int j = 1; j < n; ++j)
        if (corr(j).real() > corr(best).real()) best = j;

    Eigen::ArrayXd k = g.wavenumbers();
    k(g.nyquist_index()) = 0.0;
    a(g.nyquist_index()) = 0.0;
    double s = best * g.spacing();
    for (int it = 0; it < 30; ++it) {
        const Eigen::ArrayXcd e = a * (Complex(0.0, 1.0) * k * s).exp();
        const double d1 = (Complex(0.0, 1.0) * k * e).sum().real();
        const double d2 = -(k * k * e).sum().real();
        if (!(d2 < 0.0)) break;
        const double ds = -d1 / d2;
        s += std::clamp(ds, -g.spacing(), g.spacing());
        if (std::abs(ds) < 1e-15 * g.length()) break;
    }
    s -= g.length() * std::round(s / g.length());

    ShiftedError out;
    out.shift = s;
    out.relative = l2_norm(u - translate(ref, s)) / l2_norm(ref);
    return out;
}

}  // namespace lwkdv
