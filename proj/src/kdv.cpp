#include "lwkdv/kdv.hpp"
#include "lwkdv/integrators.hpp"
#include "lwkdv/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace lwkdv {

Complex KdvEquation::linear_symbol(double k) const
{
    return Complex(0.0, -(dispersion * k * k * k + advection * k));
}

RealField LimitModel::to_canonical(const RealField& a) const
{
    if (!has_canonical) throw std::logic_error("model has no canonical form: " + diagnostic);
    return rescaling.amplitude * a;
}

RealField LimitModel::from_canonical(const RealField& u) const
{
    if (!has_canonical) throw std::logic_error("model has no canonical form: " + diagnostic);
    return (1.0 / rescaling.amplitude) * u;
}

KdvEquation canonical_kdv(const Tensor3& q, double dispersion)
{
    KdvEquation eq;
    eq.form = KdvEquation::Form::flux;
    eq.dispersion = dispersion;
    eq.nonlinearity = q;
    return eq;
}

LimitModel make_limit_model(double sound_speed, const Tensor3& t)
{
    if (!(sound_speed > 0.0)) throw std::invalid_argument("sound speed must be positive");
    LimitModel m;
    m.dim = t.dim();
    m.sound_speed = sound_speed;
    m.raw_nonlinearity = t;
    m.raw.form = KdvEquation::Form::raw;
    m.raw.dispersion = 1.0 / (8.0 * sound_speed);
    m.raw.nonlinearity = t;
    m.raw.nonlinear_weight = 1.0 / (2.0 * sound_speed);

    const double norm = t.frobenius();
    const double defect = t.symmetry_defect();
    if (defect > 1e-12 * std::max(1.0, norm)) {
        m.has_canonical = false;
        m.diagnostic = "nonlinearity is not fully symmetric (defect " + std::to_string(defect) + ")";
        return m;
    }
    // t' = t/(8c), u = kappa A turns the raw equation into u_t' = u_xxx - d/dx Q(u,u), Q = -(2/kappa) T.
    const double kappa = norm > 0.0 ? 2.0 * norm : 1.0;
    m.has_canonical = true;
    m.rescaling.time_factor = 1.0 / (8.0 * sound_speed);
    m.rescaling.amplitude = kappa;
    m.canonical = canonical_kdv((-2.0 / kappa) * t.symmetrized());
    return m;
}

RealField kdv_nonlinear_rhs(const KdvEquation& eq, const RealField& u)
{
    if (u.dim() != eq.dim()) throw std::invalid_argument("field dimension does not match equation");
    if (eq.form == KdvEquation::Form::flux) return -1.0 * spectral_derivative(q_apply(eq.nonlinearity, u, u), 1);
    return eq.nonlinear_weight * q_apply(eq.nonlinearity, spectral_derivative(u, 1), u);
}

RealField kdv_rhs(const KdvEquation& eq, const RealField& u)
{
    RealField lin = eq.dispersion * spectral_derivative(u, 3);
    if (eq.advection != 0.0) lin -= eq.advection * spectral_derivative(u, 1);
    return lin + kdv_nonlinear_rhs(eq, u);
}

bool BlowupMonitor::observe(double t, const RealField& u)
{
    if (triggered_) return true;
    if (!u.all_finite()) {
        triggered_ = true;
        time_ = t;
        max_grad_.push_back(std::numeric_limits<double>::infinity());
        return true;
    }
    const double g = sup_norm(spectral_derivative(u, 1));
    max_grad_.push_back(g);
    if (initial_ < 0.0) {
        initial_ = g;
        return false;
    }
    if (initial_ > 0.0 && g >= factor_ * initial_) {
        triggered_ = true;
        time_ = t;
    }
    return triggered_;
}

BlowupReport blowup_monitor(const Trajectory<double>& traj, double factor)
{
    BlowupMonitor mon(factor);
    for (size_t n = 0; n < traj.snapshots.size(); ++n)
        if (mon.observe(traj.times[n], traj.snapshots[n])) break;
    BlowupReport r;
    r.breakdown = mon.triggered() || traj.breakdown;
    r.time = mon.triggered() ? mon.time() : traj.breakdown_time;
    r.max_gradient = mon.max_gradient();
    return r;
}

Trajectory<double> evolve_kdv(const KdvEquation& eq, const RealField& u0, const EvolveOptions& opts)
{
    if (!(std::abs(opts.dt) > 0.0) || !std::isfinite(opts.t_final)) throw std::invalid_argument("bad time step");
    if (u0.dim() != eq.dim()) throw std::invalid_argument("field dimension does not match equation");
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(std::abs(opts.t_final) / std::abs(opts.dt) - 1e-9)));
    const double h = opts.t_final / steps;

    const DiagonalOperator lin(u0.grid, [&](double k) { return eq.linear_symbol(k); });
    auto propagate = [&](const RealField& v, double tau) { return lin.propagate(v, tau); };
    auto rhs = [&](const RealField& v) { return kdv_nonlinear_rhs(eq, v); };

    Trajectory<double> traj;
    traj.times.push_back(0.0);
    traj.snapshots.push_back(u0);
    BlowupMonitor mon(opts.blowup_factor);
    if (opts.monitor_blowup) mon.observe(0.0, u0);

    RealField u = u0;
    for (long n = 1; n <= steps; ++n) {
        const double t = n * h;
        try {
            u = ifrk4_step(u, propagate, rhs, h);
        } catch (const StepRejected&) {
            traj.breakdown = true;
            traj.breakdown_time = t;
            traj.status = "step rejected";
            traj.steps = n;
            return traj;
        }
        traj.steps = n;
        const bool keep = n == steps || (opts.snapshot_every > 0 && n % opts.snapshot_every == 0);
        if (opts.monitor_blowup && mon.observe(t, u)) {
            traj.times.push_back(t);
            traj.snapshots.push_back(u);
            traj.breakdown = true;
            traj.breakdown_time = mon.time();
            traj.status = "gradient blow-up";
            return traj;
        }
        if (keep) {
            traj.times.push_back(t);
            traj.snapshots.push_back(u);
        }
    }
    return traj;
}

double cubic_integral(const Tensor3& q, const RealField& u)
{
    const int m = 2 * u.grid.size();
    const Samples<double> fine = upsample(u, m);
    const Samples<double> qq = apply_pointwise(q, fine, fine);
    return (qq * fine).sum() * (u.grid.length() / m);
}

ConservedQuantities conserved_quantities(const KdvEquation& eq, const RealField& u)
{
    ConservedQuantities c;
    c.momentum = means(u) * u.grid.length();
    c.mass = 0.5 * std::pow(l2_norm(u), 2);
    const Tensor3 q = eq.form == KdvEquation::Form::flux ? eq.nonlinearity
                                                          : (-0.5 * eq.nonlinear_weight) * eq.nonlinearity;
    c.hamiltonian = 0.5 * eq.dispersion * std::pow(l2_norm(spectral_derivative(u, 1)), 2) + cubic_integral(q, u) / 3.0;
    return c;
}

std::vector<CharacteristicField> genuine_nonlinearity(const Tensor3& q, const Eigen::VectorXd& u, double cluster_tol,
                                                      double degenerate_tol)
{
    const int d = q.dim();
    const Eigen::MatrixXd jac = 2.0 * q.partial(u);
    const Eigen::MatrixXd sym = 0.5 * (jac + jac.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());

    std::vector<CharacteristicField> out(d);
    for (int a = 0; a < d; ++a) {
        auto& f = out[a];
        f.eigenvalue = lam(a);
        f.eigenvector = es.eigenvectors().col(a);
        f.nonlinearity = 2.0 * q.apply(f.eigenvector, f.eigenvector).dot(f.eigenvector);
        bool clustered = false;
        for (int b = 0; b < d; ++b)
            if (b != a && std::abs(lam(a) - lam(b)) <= cluster_tol * scale) clustered = true;
        if (clustered)
            f.status = CharacteristicField::Status::clustered;
        else if (std::abs(f.nonlinearity) > degenerate_tol)
            f.status = CharacteristicField::Status::genuinely_nonlinear;
        else
            f.status = CharacteristicField::Status::linearly_degenerate;
    }
    return out;
}

}  // namespace lwkdv
