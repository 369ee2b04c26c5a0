#include "lwkdv/micro.hpp"
#include "lwkdv/integrators.hpp"
#include "lwkdv/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace lwkdv {

namespace {

const Complex kI(0.0, 1.0);

Samples<double> cross(const Samples<double>& a, const Samples<double>& b)
{
    Samples<double> out(a.rows(), 3);
    out.col(0) = a.col(1) * b.col(2) - a.col(2) * b.col(1);
    out.col(1) = a.col(2) * b.col(0) - a.col(0) * b.col(2);
    out.col(2) = a.col(0) * b.col(1) - a.col(1) * b.col(0);
    return out;
}

void renormalize(RealField& s)
{
    for (int b = 0; b < s.dim() / 3; ++b) {
        auto blk = s.values.middleCols(3 * b, 3);
        const Eigen::ArrayXd norm = blk.square().rowwise().sum().sqrt();
        for (int c = 0; c < 3; ++c) blk.col(c) /= norm;
    }
}

void check_gp_chart(const ComplexField& u)
{
    const double lo = u.values.abs().minCoeff(), hi = u.values.abs().maxCoeff();
    if (!(lo >= 0.5 && hi <= 1.5)) throw ChartBreakdown("modulus left [1/2, 3/2]");
}

// u_k <- u_k exp(-i tau dG/ds_k / (scale |u_k|)), the exact flow of the potential part.
void gp_phase_rotation(const MicroModelSpec& spec, ComplexField& u, double tau, double scale)
{
    const int d = u.dim();
    Eigen::VectorXd s(d);
    for (int j = 0; j < u.grid.size(); ++j) {
        for (int k = 0; k < d; ++k) s(k) = std::abs(u.values(j, k)) - 1.0;
        const Eigen::VectorXd g = spec.gp_potential_gradient(s);
        for (int k = 0; k < d; ++k) u.values(j, k) *= std::exp(-kI * (tau * g(k) / (scale * (1.0 + s(k)))));
    }
}

ComplexField gp_potential_force(const MicroModelSpec& spec, const ComplexField& u)
{
    const int d = u.dim();
    ComplexField out(u.grid, d);
    Eigen::VectorXd s(d);
    for (int j = 0; j < u.grid.size(); ++j) {
        for (int k = 0; k < d; ++k) s(k) = std::abs(u.values(j, k)) - 1.0;
        const Eigen::VectorXd g = spec.gp_potential_gradient(s);
        for (int k = 0; k < d; ++k) out.values(j, k) = g(k) * u.values(j, k) / (1.0 + s(k));
    }
    return out;
}

// Spin dynamics without the transport term, already divided by eps^2.
RealField spin_nonlinear_rhs(const MicroModelSpec& spec, const RealField& s, double eps)
{
    const RealField sxx = spectral_derivative(s, 2);
    RealField out(s.grid, s.dim());
    const double inv = 1.0 / (eps * eps);
    if (spec.is_ll()) {
        Samples<double> h = 0.5 * eps * sxx.values;
        for (int j = 0; j < s.grid.size(); ++j) h(j, 2) -= spec.ll_potential_derivative(s.values(j, 2)) / eps;
        out.values = inv * cross(s.values, h);
        return out;
    }
    const RealField sx = spectral_derivative(s, 1);
    const Samples<double> u = s.values.leftCols(3), v = s.values.rightCols(3);
    const Samples<double> hu = 0.5 * eps * sxx.values.leftCols(3) - sx.values.rightCols(3) - (2.0 / eps) * v;
    const Samples<double> hv = 0.5 * eps * sxx.values.rightCols(3) + sx.values.leftCols(3) - (2.0 / eps) * u;
    out.values.leftCols(3) = inv * cross(u, hu);
    out.values.rightCols(3) = inv * cross(v, hv);
    return out;
}

// Zero the modes with |k| above two thirds of the Nyquist wavenumber. Aliased products of the
// potential terms otherwise pair near-Nyquist modes of opposite transport and grow.
template <typename Scalar>
void truncate_two_thirds(Field<Scalar>& u)
{
    const Eigen::ArrayXd k = u.grid.wavenumbers().abs();
    const double cut = 2.0 / 3.0 * k(u.grid.nyquist_index());
    Samples<Complex> spec = to_spectrum(u);
    for (int j = 0; j < k.size(); ++j)
        if (k(j) > cut) spec.row(j).setZero();
    u = from_spectrum<Scalar>(u.grid, spec);
}

template <typename Scalar>
double trapezoid(const Eigen::Array<Scalar, Eigen::Dynamic, 1>& f, double dx)
{
    return std::real(f.sum()) * dx;
}

}  // namespace

MicroState::MicroState(double e, ComplexField wave) : eps(e), payload(std::move(wave))
{
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
}

MicroState::MicroState(double e, RealField spins) : eps(e), payload(std::move(spins))
{
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
    if (std::get<RealField>(payload).dim() % 3 != 0) throw std::invalid_argument("spin fields need 3 components per sphere");
}

const Grid& MicroState::grid() const
{
    return is_wave() ? wave().grid : spins().grid;
}

double sound_speed(const MicroModelSpec& spec)
{
    switch (spec.kind) {
    case ModelKind::gp_scalar: return 1.0;
    case ModelKind::gp_coupled: return std::sqrt(spec.params.lambda);
    case ModelKind::ll_easy_plane: return std::sqrt(spec.params.K);
    case ModelKind::ll_easy_cone: return std::sqrt(spec.params.alpha) * std::sin(spec.params.theta0);
    case ModelKind::af_chain: return 1.0;
    }
    return 1.0;
}

MicroState micro_rhs(const MicroModelSpec& spec, const MicroState& s)
{
    const double eps = s.eps, c = sound_speed(spec);
    if (spec.is_gp()) {
        const ComplexField& u = s.wave();
        check_gp_chart(u);
        ComplexField out = c * spectral_derivative(u, 1);
        ComplexField disp = spectral_derivative(u, 2);
        ComplexField force = gp_potential_force(spec, u);
        out.values += kI * (0.5 * eps * disp.values - force.values / eps);
        out *= 1.0 / (eps * eps);
        return MicroState(eps, out);
    }
    const RealField& g = s.spins();
    RealField out = (c / (eps * eps)) * spectral_derivative(g, 1) + spin_nonlinear_rhs(spec, g, eps);
    return MicroState(eps, out);
}

double default_micro_dt(const MicroModelSpec& spec, const Grid& grid, double eps)
{
    const double dx = grid.spacing();
    // Dispersion bound; the GP split-step needs it as well, since modes with dt k^2 / (2 eps) near pi
    // resonate with the phase rotation.
    const double cfl = 0.4 * eps * dx * dx;
    // GP: a fixed lab-frame step ds = dt / eps^3 = 1/2 keeps the splitting error below the limit error.
    if (spec.is_gp()) return std::min(0.5 * eps * eps * eps, cfl);
    return std::min(eps * eps / 10.0, cfl);
}

double unit_norm_deviation(const MicroModelSpec& spec, const MicroState& s)
{
    if (spec.is_gp()) return 0.0;
    const RealField& g = s.spins();
    double worst = 0.0;
    for (int b = 0; b < g.dim() / 3; ++b) {
        const Eigen::ArrayXd norm = g.values.middleCols(3 * b, 3).square().rowwise().sum().sqrt();
        worst = std::max(worst, (norm - 1.0).abs().maxCoeff());
    }
    return worst;
}

MicroTrajectory evolve_micro(const MicroModelSpec& spec, const MicroState& s0, const MicroOptions& opts)
{
    if (!(opts.t_final > 0.0)) throw std::invalid_argument("t_final must be positive");
    if (spec.is_gp() != s0.is_wave()) throw std::invalid_argument("state payload does not match the model");
    if (!spec.is_gp() && s0.spins().dim() != spec.components()) throw std::invalid_argument("wrong spin component count");
    if (spec.is_gp() && s0.wave().dim() != spec.components()) throw std::invalid_argument("wrong wave component count");
    if (opts.splitting_order != 2 && opts.splitting_order != 4) throw std::invalid_argument("splitting order must be 2 or 4");

    const double eps = s0.eps, c = sound_speed(spec);
    const Grid& grid = s0.grid();
    const double dt_req = opts.dt > 0.0 ? opts.dt : default_micro_dt(spec, grid, eps);
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(opts.t_final / dt_req - 1e-9)));
    const double h = opts.t_final / steps;

    MicroTrajectory traj;
    traj.dt = h;
    traj.times.push_back(0.0);
    traj.states.push_back(s0);
    traj.max_norm_deviation = unit_norm_deviation(spec, s0);

    const double e2 = eps * eps, e3 = e2 * eps;
    if (spec.is_gp()) {
        const DiagonalOperator lin(grid, [&](double k) { return Complex(0.0, c * k - 0.5 * eps * k * k) / e2; });
        auto strang = [&](ComplexField& u, double tau) {
            gp_phase_rotation(spec, u, 0.5 * tau, e3);
            u = lin.propagate(u, tau);
            gp_phase_rotation(spec, u, 0.5 * tau, e3);
        };
        const double w1 = 1.0 / (2.0 - std::cbrt(2.0)), w0 = 1.0 - 2.0 * w1;
        ComplexField u = s0.wave();
        try {
            check_gp_chart(u);
            for (long n = 1; n <= steps; ++n) {
                if (opts.splitting_order == 2) {
                    strang(u, h);
                } else {
                    strang(u, w1 * h);
                    strang(u, w0 * h);
                    strang(u, w1 * h);
                }
                if (opts.dealias) truncate_two_thirds(u);
                require_finite(u, "evolve_micro");
                check_gp_chart(u);
                traj.steps = n;
                if (n == steps || (opts.snapshot_every > 0 && n % opts.snapshot_every == 0)) {
                    traj.times.push_back(n * h);
                    traj.states.emplace_back(eps, u);
                }
            }
        } catch (const std::runtime_error& e) {
            traj.aborted = true;
            traj.status = e.what();
            traj.times.push_back((traj.steps + 1) * h);
            traj.states.emplace_back(eps, u);
        }
        return traj;
    }

    const DiagonalOperator transport(grid, [&](double k) { return Complex(0.0, c * k / e2); });
    auto propagate = [&](const RealField& v, double tau) { return transport.propagate(v, tau); };
    auto rhs = [&](const RealField& v) { return spin_nonlinear_rhs(spec, v, eps); };
    RealField g = s0.spins();
    try {
        for (long n = 1; n <= steps; ++n) {
            g = ifrk4_step(g, propagate, rhs, h);
            if (opts.dealias) truncate_two_thirds(g);
            renormalize(g);
            traj.steps = n;
            const MicroState st(eps, g);
            traj.max_norm_deviation = std::max(traj.max_norm_deviation, unit_norm_deviation(spec, st));
            if (n == steps || (opts.snapshot_every > 0 && n % opts.snapshot_every == 0)) {
                traj.times.push_back(n * h);
                traj.states.push_back(st);
            }
        }
    } catch (const std::runtime_error& e) {
        traj.aborted = true;
        traj.status = e.what();
    }
    return traj;
}

MicroInvariants micro_invariants(const MicroModelSpec& spec, const MicroState& s)
{
    MicroInvariants inv;
    const double eps = s.eps;
    const double dx = s.grid().spacing();
    if (spec.is_gp()) {
        const ComplexField& u = s.wave();
        const ComplexField ux = spectral_derivative(u, 1);
        const int d = u.dim();
        Eigen::ArrayXd dens(u.grid.size());
        Eigen::VectorXd sv(d);
        for (int j = 0; j < u.grid.size(); ++j) {
            for (int k = 0; k < d; ++k) sv(k) = std::abs(u.values(j, k)) - 1.0;
            dens(j) = spec.gp_potential(sv);
        }
        dens += 0.25 * eps * eps * ux.values.abs2().rowwise().sum();
        inv.energy = trapezoid<double>(dens, dx);
        const Eigen::ArrayXd mom = (u.values * ux.values.conjugate()).imag().rowwise().sum();
        inv.momentum = trapezoid<double>(mom, dx);
        inv.mass = trapezoid<double>(u.values.abs2().rowwise().sum().eval(), dx);
        return inv;
    }
    const RealField& g = s.spins();
    const RealField gx = spectral_derivative(g, 1);
    Eigen::ArrayXd dens = Eigen::ArrayXd::Zero(g.grid.size());
    Eigen::ArrayXd mom = Eigen::ArrayXd::Zero(g.grid.size());
    for (int b = 0; b < g.dim() / 3; ++b) {
        const auto a = g.values.middleCols(3 * b, 3);
        const auto ax = gx.values.middleCols(3 * b, 3);
        const Eigen::ArrayXd planar = a.col(0).square() + a.col(1).square();
        mom += a.col(2) * (a.col(0) * ax.col(1) - a.col(1) * ax.col(0)) / planar;
    }
    if (spec.is_ll()) {
        // Normalization of the spin-chain energy: |Gamma_x|^2 / 2 + 2 V, twice the Hamiltonian of the flow.
        dens += 0.5 * eps * eps * gx.values.square().rowwise().sum();
        for (int j = 0; j < g.grid.size(); ++j) dens(j) += 2.0 * spec.ll_potential(g.values(j, 2));
    } else {
        const Samples<double> u = g.values.leftCols(3), v = g.values.rightCols(3);
        const Samples<double> ux = gx.values.leftCols(3), vx = gx.values.rightCols(3);
        dens += 0.25 * eps * eps * gx.values.square().rowwise().sum();
        dens += (u + v).square().rowwise().sum();
        // W = (v, -u)/2 with B = grad W^T - grad W
        dens -= 0.5 * eps * ((v * ux).rowwise().sum() - (u * vx).rowwise().sum());
    }
    inv.energy = trapezoid<double>(dens, dx);
    inv.momentum = trapezoid<double>(mom, dx);
    return inv;
}

MicroState chart_to_state(const MicroModelSpec& spec, const RealField& phi, const RealField& nu, double eps)
{
    phi.check_compatible(nu);
    const Grid& grid = phi.grid;
    const int n = grid.size();
    const double e2 = eps * eps;
    switch (spec.kind) {
    case ModelKind::gp_scalar:
    case ModelKind::gp_coupled: {
        if (phi.dim() != spec.components()) throw std::invalid_argument("chart dimension mismatch");
        ComplexField u(grid, phi.dim());
        for (int k = 0; k < phi.dim(); ++k)
            for (int j = 0; j < n; ++j)
                u.values(j, k) = (1.0 + e2 * nu.values(j, k)) * std::exp(kI * (eps * phi.values(j, k)));
        return MicroState(eps, u);
    }
    case ModelKind::ll_easy_plane:
    case ModelKind::ll_easy_cone: {
        if (phi.dim() != 1) throw std::invalid_argument("chart dimension mismatch");
        RealField g(grid, 3);
        const bool cone = spec.kind == ModelKind::ll_easy_cone;
        const double th0 = cone ? spec.params.theta0 : 0.5 * M_PI;
        const double st0 = std::sin(th0);
        for (int j = 0; j < n; ++j) {
            // The plane chart is the cone chart at th0 = pi/2 composed with the half turn about e1.
            const double psi = cone ? -eps * phi.values(j, 0) / st0 : eps * phi.values(j, 0);
            const double theta = cone ? th0 - e2 * nu.values(j, 0) : th0 + e2 * nu.values(j, 0);
            g.values(j, 0) = std::sin(theta) * std::cos(psi);
            g.values(j, 1) = std::sin(theta) * std::sin(psi);
            g.values(j, 2) = std::cos(theta);
        }
        return MicroState(eps, g);
    }
    case ModelKind::af_chain: {
        if (phi.dim() != 2) throw std::invalid_argument("chart dimension mismatch");
        RealField g(grid, 6);
        const double r2 = std::sqrt(2.0);
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector3d z(0.0, eps * phi.values(j, 0) / r2, eps * phi.values(j, 1) / r2);
            const double th = z.norm();
            Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
            if (th > 0.0) rot = Eigen::AngleAxisd(th, Eigen::Vector3d::UnitX().cross(z / th)).toRotationMatrix();
            const Eigen::Vector3d omega = rot.col(0);
            const Eigen::Vector3d x = e2 * (nu.values(j, 1) * rot.col(1) - nu.values(j, 0) * rot.col(2)) / r2;
            const double a = x.norm();
            const Eigen::Vector3d xs = a > 0.0 ? Eigen::Vector3d(std::sin(a) * x / a) : Eigen::Vector3d::Zero();
            const Eigen::Vector3d u = std::cos(a) * omega + xs;
            const Eigen::Vector3d v = -std::cos(a) * omega + xs;
            for (int c = 0; c < 3; ++c) {
                g.values(j, c) = u(c);
                g.values(j, 3 + c) = v(c);
            }
        }
        return MicroState(eps, g);
    }
    }
    throw std::logic_error("unhandled model");
}

MicroState well_prepared_init(const MicroModelSpec& spec, const GeometryData& g, const RealField& a0, double eps)
{
    if (a0.dim() != g.dim) throw std::invalid_argument("initial profile dimension does not match the geometry");
    const double scale = std::max(1.0, a0.values.abs().maxCoeff());
    if (means(a0).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("initial profile must have zero mean for a periodic phase");
    // (c + J) phi_x = A0 with (c + J)^{-1} = (c - J)/lambda
    const Eigen::MatrixXd inv = (g.c * Eigen::MatrixXd::Identity(g.dim, g.dim) - g.i0b0) / g.lambda;
    RealField phix(a0.grid, Samples<double>(a0.values.matrix() * inv.transpose()));
    const RealField phi = antiderivative(phix);
    const RealField nu = (1.0 / (2.0 * g.lambda)) * a0;
    return chart_to_state(spec, phi, nu, eps);
}

ComplexField evolve_gp_lab(const MicroModelSpec& spec, const ComplexField& gamma0, double s_final, double ds)
{
    if (!spec.is_gp()) throw std::invalid_argument("lab-frame path is GP only");
    const long steps = std::max<long>(1, static_cast<long>(std::ceil(s_final / ds - 1e-9)));
    const double h = s_final / steps;
    const DiagonalOperator lin(gamma0.grid, [](double k) { return Complex(0.0, -0.5 * k * k); });
    ComplexField u = gamma0;
    for (long n = 0; n < steps; ++n) {
        gp_phase_rotation(spec, u, 0.5 * h, 1.0);
        u = lin.propagate(u, h);
        gp_phase_rotation(spec, u, 0.5 * h, 1.0);
    }
    return u;
}

}  // namespace lwkdv
