#include "lwkdv/hydro.hpp"
#include "lwkdv/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lwkdv {

namespace {

const double kPi = std::numbers::pi;

double wrap(double a)
{
    return a - 2.0 * kPi * std::round(a / (2.0 * kPi));
}

// Nearest-branch unwrapping along the grid; returns the winding number of the closed loop.
int unwrap(Eigen::Ref<Eigen::ArrayXd> theta)
{
    const int n = static_cast<int>(theta.size());
    for (int j = 1; j < n; ++j) theta(j) = theta(j - 1) + wrap(theta(j) - theta(j - 1));
    const double closure = theta(n - 1) + wrap(theta(0) - theta(n - 1)) - theta(0);
    return static_cast<int>(std::lround(closure / (2.0 * kPi)));
}

void align_branch(Eigen::Ref<Eigen::ArrayXd> theta, const Eigen::ArrayXd* reference)
{
    const double target = reference ? reference->mean() : 0.0;
    theta -= 2.0 * kPi * std::round((theta.mean() - target) / (2.0 * kPi));
}

void invalidate(HydroState& h, const std::string& why, int index)
{
    if (!h.valid) return;
    h.valid = false;
    h.diagnostic = why;
    h.bad_index = index;
}

Eigen::VectorXd row(const Samples<double>& a, int j)
{
    return a.row(j).transpose().matrix();
}

double l2(const Eigen::ArrayXXd& v, double dx)
{
    return std::sqrt(v.square().sum() * dx);
}

// Matrix S = Id + eps^2 II_top(., n) acting on tangent coordinates.
Eigen::MatrixXd shape_operator(const GeometryData& g, const Eigen::VectorXd& nu, double eps)
{
    return Eigen::MatrixXd::Identity(g.dim, g.dim) - eps * eps * g.ii_perp.partial(nu);
}

}  // namespace

HydroState extract_hydro(const MicroModelSpec& spec, const MicroState& s, const HydroState* previous)
{
    const Grid& grid = s.grid();
    const int n = grid.size();
    const double eps = s.eps, e2 = eps * eps;
    const int d = spec.kind == ModelKind::af_chain ? 2 : (spec.is_gp() ? spec.components() : 1);
    HydroState h(eps, RealField(grid, d), RealField(grid, d));
    if (previous && (previous->grid() != grid || previous->phi.dim() != d)) throw std::invalid_argument("previous state mismatch");

    auto set_phase = [&](int comp, Eigen::ArrayXd theta) {
        if (unwrap(theta) != 0) invalidate(h, "phase winds around the circle", 0);
        Eigen::ArrayXd ref;
        if (previous) ref = eps * previous->phi.values.col(comp);
        align_branch(theta, previous ? &ref : nullptr);
        h.phi.values.col(comp) = theta / eps;
    };

    if (spec.is_gp()) {
        const ComplexField& u = s.wave();
        for (int k = 0; k < d; ++k) {
            Eigen::ArrayXd theta(n);
            for (int j = 0; j < n; ++j) {
                const double r = std::abs(u.values(j, k));
                if (!(r >= 0.5 && r <= 1.5)) invalidate(h, "modulus outside [1/2, 3/2]", j);
                theta(j) = std::arg(u.values(j, k));
                h.nu.values(j, k) = (r - 1.0) / e2;
            }
            set_phase(k, theta);
        }
    } else if (spec.is_ll()) {
        const RealField& g = s.spins();
        const bool cone = spec.kind == ModelKind::ll_easy_cone;
        const double th0 = cone ? spec.params.theta0 : 0.5 * kPi;
        Eigen::ArrayXd psi(n);
        for (int j = 0; j < n; ++j) {
            psi(j) = std::atan2(g.values(j, 1), g.values(j, 0));
            const double theta = std::acos(std::clamp(g.values(j, 2), -1.0, 1.0));
            if (std::abs(theta - th0) >= 0.5 * kPi || std::hypot(g.values(j, 0), g.values(j, 1)) == 0.0)
                invalidate(h, "spin too far from the minimizing circle", j);
            h.nu.values(j, 0) = (cone ? th0 - theta : theta - th0) / e2;
        }
        if (cone) {
            const double st0 = std::sin(th0);
            if (unwrap(psi) != 0) invalidate(h, "azimuth winds around the axis", 0);
            Eigen::ArrayXd scaled = -st0 * psi;
            Eigen::ArrayXd ref;
            if (previous) ref = eps * previous->phi.values.col(0);
            scaled -= 2.0 * kPi * st0 * std::round((scaled.mean() - (previous ? ref.mean() : 0.0)) / (2.0 * kPi * st0));
            h.phi.values.col(0) = scaled / eps;
        } else {
            set_phase(0, psi);
        }
    } else {
        const RealField& g = s.spins();
        const double r2 = std::sqrt(2.0);
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector3d u(g.values(j, 0), g.values(j, 1), g.values(j, 2));
            const Eigen::Vector3d v(g.values(j, 3), g.values(j, 4), g.values(j, 5));
            const Eigen::Vector3d diff = u - v, sum = u + v;
            if (diff.norm() == 0.0) {
                invalidate(h, "spins are parallel", j);
                continue;
            }
            const Eigen::Vector3d omega = diff.normalized();
            const Eigen::Vector3d perp(0.0, omega(1), omega(2));
            const double th = std::atan2(perp.norm(), omega(0));
            if (th >= kPi) invalidate(h, "outside the chart", j);
            Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
            if (perp.norm() > 0.0) {
                const Eigen::Vector3d dir = perp / perp.norm();
                h.phi.values(j, 0) = r2 * th * dir(1) / eps;
                h.phi.values(j, 1) = r2 * th * dir(2) / eps;
                rot = Eigen::AngleAxisd(th, Eigen::Vector3d::UnitX().cross(dir)).toRotationMatrix();
            }
            const double a = std::atan2(sum.norm(), diff.norm());
            const Eigen::Vector3d x = sum.norm() > 0.0 ? Eigen::Vector3d(a * sum / sum.norm()) : Eigen::Vector3d::Zero();
            const double xi1 = x.dot(rot.col(1)), xi2 = x.dot(rot.col(2));
            h.nu.values(j, 0) = -r2 * xi2 / e2;
            h.nu.values(j, 1) = r2 * xi1 / e2;
        }
    }
    if (h.valid && eps * h.phi.values.abs().maxCoeff() >= kChartRadius) invalidate(h, "eps |phi| reached the chart radius", 0);
    return h;
}

std::vector<HydroState> extract_trajectory(const MicroModelSpec& spec, const std::vector<MicroState>& states)
{
    std::vector<HydroState> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(extract_hydro(spec, s, out.empty() ? nullptr : &out.back()));
    return out;
}

MicroState reconstruct_micro(const MicroModelSpec& spec, const HydroState& h)
{
    return chart_to_state(spec, h.phi, h.nu, h.eps);
}

Observables observables(const GeometryData& g, const HydroState& h)
{
    if (h.phi.dim() != g.dim) throw std::invalid_argument("hydro state dimension does not match the geometry");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(g.dim, g.dim);
    const RealField phix = spectral_derivative(h.phi, 1);
    const Samples<double> plus = (phix.values.matrix() * (g.c * id + g.i0b0).transpose()).array();
    const Samples<double> minus = (phix.values.matrix() * (g.c * id - g.i0b0).transpose()).array();
    const Samples<double> a = 2.0 * g.lambda * h.nu.values;
    return {RealField(h.grid(), plus - a), RealField(h.grid(), minus + a), RealField(h.grid(), a)};
}

AlmostHamiltonian almost_hamiltonian(const GeometryData& g, const HydroState& h)
{
    const double eps = h.eps, e2 = eps * eps;
    const int n = h.grid().size(), d = g.dim;
    const RealField phix = spectral_derivative(h.phi, 1);
    const RealField nux = spectral_derivative(h.nu, 1);
    const Eigen::MatrixXd cj = g.c * Eigen::MatrixXd::Identity(d, d) + g.i0b0;
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
        const Eigen::VectorXd nu = row(h.nu.values, j);
        const Eigen::VectorXd px = row(phix.values, j);
        const Eigen::VectorXd nx = row(nux.values, j);
        const Eigen::MatrixXd s = shape_operator(g, nu, eps);
        const Eigen::VectorXd half = px + 0.5 * (s - Eigen::MatrixXd::Identity(d, d)) * px;
        total += g.lambda * nu.squaredNorm() + 0.25 * e2 * e2 * nx.squaredNorm() + e2 * g.f1.apply(nu, nu).dot(nu) / 3.0 +
                 0.25 * (s * px).squaredNorm() - (cj * half).dot(nu);
    }
    AlmostHamiltonian out;
    out.value = total * h.grid().spacing();
    out.leading = std::pow(l2_norm(observables(g, h).W), 2) / (4.0 * g.lambda);
    return out;
}

HydroResidual hydro_residual(const GeometryData& g, const std::vector<double>& times,
                             const std::vector<HydroState>& states, bool include_singular)
{
    const size_t m = states.size();
    if (m < 5 || times.size() != m) throw std::invalid_argument("need at least five snapshots with times");
    const double dt = times[1] - times[0];
    for (size_t i = 1; i < m; ++i)
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("snapshots must be uniformly spaced");
    for (const auto& s : states)
        if (!s.valid) throw std::invalid_argument("invalid snapshot: " + s.diagnostic);

    const int d = g.dim;
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd cp = g.c * id + g.i0b0, cm = g.c * id - g.i0b0;
    HydroResidual out;
    for (size_t i = 2; i + 2 < m; ++i) {
        const HydroState& h = states[i];
        const double eps = h.eps, e2 = eps * eps;
        const int n = h.grid().size();
        auto ddt = [&](auto member) {
            return ((states[i - 2].*member).values - 8.0 * (states[i - 1].*member).values +
                    8.0 * (states[i + 1].*member).values - (states[i + 2].*member).values) /
                   (12.0 * dt);
        };
        const Samples<double> phit = ddt(&HydroState::phi);
        const Samples<double> nut = ddt(&HydroState::nu);
        const RealField phix = spectral_derivative(h.phi, 1);
        const RealField nux = spectral_derivative(h.nu, 1);
        const RealField nuxx = spectral_derivative(h.nu, 2);

        RealField sphix(h.grid(), d);
        Samples<double> r1(n, d), r2(n, d);
        for (int j = 0; j < n; ++j) {
            const Eigen::MatrixXd s = shape_operator(g, row(h.nu.values, j), eps);
            sphix.values.row(j) = (s * row(phix.values, j)).transpose().array();
        }
        const RealField div = spectral_derivative(sphix, 1);
        for (int j = 0; j < n; ++j) {
            const Eigen::VectorXd nu = row(h.nu.values, j);
            const Eigen::VectorXd px = row(phix.values, j);
            const Eigen::VectorXd nx = row(nux.values, j);
            const Eigen::MatrixXd s = shape_operator(g, nu, eps);

            Eigen::VectorXd f1 = 0.5 * e2 * g.ii_perp.apply(px, px) + 0.5 * e2 * row(nuxx.values, j) - e2 * g.f1.apply(nu, nu);
            if (include_singular) f1 += -2.0 * g.lambda * nu + cp * row(sphix.values, j);
            r1.row(j) = (s * row(phit, j) - f1 / e2).transpose().array();

            // II_top(phi_x, nu_x) = -i0 II_perp(phi_x, .)^T nu_x
            Eigen::VectorXd f2 = -0.5 * e2 * g.ii_perp.partial(px).transpose() * nx;
            if (include_singular) f2 += 0.5 * row(div.values, j) - cm * nx;
            r2.row(j) = (row(nut, j) + f2 / e2).transpose().array();
        }
        const double dx = h.grid().spacing();
        out.times.push_back(times[i]);
        out.phase_line.push_back(l2(r1, dx));
        out.amplitude_line.push_back(l2(r2, dx));
        out.combined.push_back(std::hypot(out.phase_line.back(), out.amplitude_line.back()));
        out.max_combined = std::max(out.max_combined, out.combined.back());
    }
    return out;
}

LimitError limit_error(const GeometryData& g, const std::vector<double>& micro_times, const std::vector<HydroState>& hydro,
                       const Trajectory<double>& kdv)
{
    if (micro_times.size() != hydro.size() || kdv.times.size() != hydro.size())
        throw std::invalid_argument("time-grid mismatch: snapshot counts differ");
    LimitError out;
    double proxy0 = 0.0;
    for (size_t i = 0; i < hydro.size(); ++i) {
        if (std::abs(micro_times[i] - kdv.times[i]) > 1e-9 * std::max(1.0, std::abs(micro_times[i])))
            throw std::invalid_argument("time-grid mismatch at snapshot " + std::to_string(i));
        const HydroState& h = hydro[i];
        const RealField& a = kdv.snapshots[i];
        const Observables ob = observables(g, h);
        const RealField phase_part = ob.W + ob.A;  // (c + J) phi_x
        out.times.push_back(micro_times[i]);
        out.amplitude_error.push_back(l2_norm(ob.A - a));
        out.phase_error.push_back(l2_norm(phase_part - a));
        out.w_norm.push_back(l2_norm(ob.W));
        out.phase_sup.push_back(h.eps * h.phi.values.abs().maxCoeff());
        auto h2 = [](const RealField& f) {
            double s = 0.0;
            for (double v : hs_seminorms(f, 2)) s += v * v;
            return std::sqrt(s);
        };
        const double proxy = h2(spectral_derivative(h.phi, 1)) + h2(h.nu);
        out.energy_proxy.push_back(proxy);
        if (i == 0) proxy0 = proxy;
        out.sup_amplitude_error = std::max(out.sup_amplitude_error, out.amplitude_error.back());
        out.sup_phase_error = std::max(out.sup_phase_error, out.phase_error.back());
        out.sup_w_norm = std::max(out.sup_w_norm, out.w_norm.back());
        out.sup_phase = std::max(out.sup_phase, out.phase_sup.back());
        out.max_energy_ratio = std::max(out.max_energy_ratio, proxy0 > 0.0 ? proxy / proxy0 : (proxy > 0.0 ? INFINITY : 1.0));
    }
    return out;
}

}  // namespace lwkdv
