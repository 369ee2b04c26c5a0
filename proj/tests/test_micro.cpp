#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lwkdv/micro.hpp"
#include "lwkdv/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

using namespace lwkdv;

namespace {

const double kPi = std::numbers::pi;
const Complex kI(0.0, 1.0);

// Eighth-order centered differences on a periodic grid.
template <typename Scalar>
Samples<Scalar> fd(const Samples<Scalar>& f, double dx, int order)
{
    static const double c1[] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    static const double c2[] = {8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0};
    const int n = static_cast<int>(f.rows());
    Samples<Scalar> out = Samples<Scalar>::Zero(n, f.cols());
    if (order == 2) out = -205.0 / 72.0 * f;
    for (int j = 0; j < n; ++j)
        for (int m = 1; m <= 4; ++m) {
            const auto fp = f.row((j + m) % n), fm = f.row((j - m + n) % n);
            out.row(j) += order == 1 ? (c1[m - 1] * (fp - fm)).eval() : (c2[m - 1] * (fp + fm)).eval();
        }
    return out / std::pow(dx, order);
}

RealField profile(const Grid& g, double amp, int dim = 1)
{
    RealField a(g, dim);
    const Eigen::ArrayXd x = g.points() * (2.0 * kPi / g.length());
    for (int k = 0; k < dim; ++k) a.values.col(k) = amp * ((1.0 + k) * x + 0.3 * k).sin() + 0.5 * amp * (2.0 * x).cos();
    return a;
}

Samples<double> cross(const Samples<double>& a, const Samples<double>& b)
{
    Samples<double> out(a.rows(), 3);
    out.col(0) = a.col(1) * b.col(2) - a.col(2) * b.col(1);
    out.col(1) = a.col(2) * b.col(0) - a.col(0) * b.col(2);
    out.col(2) = a.col(0) * b.col(1) - a.col(1) * b.col(0);
    return out;
}

double max_abs(const MicroState& s)
{
    return s.is_wave() ? s.wave().values.abs().maxCoeff() : s.spins().values.abs().maxCoeff();
}

}  // namespace

TEST_CASE("ground states are fixed points")
{
    Grid g(32, 2.0 * kPi);
    auto gp = preset(ModelKind::gp_scalar).second;
    CHECK(max_abs(micro_rhs(gp, MicroState(0.3, ComplexField(g, Samples<Complex>::Ones(32, 1))))) == 0.0);

    auto ll = preset(ModelKind::ll_easy_plane).second;
    RealField s(g, 3);
    s.values.col(0).setOnes();
    CHECK(max_abs(micro_rhs(ll, MicroState(0.3, s))) == 0.0);

    auto af = preset(ModelKind::af_chain).second;
    RealField p(g, 6);
    p.values.col(0).setOnes();
    p.values.col(3).setConstant(-1.0);
    CHECK(max_abs(micro_rhs(af, MicroState(0.3, p))) == 0.0);

    MicroOptions o;
    o.t_final = 0.1;
    const auto traj = evolve_micro(gp, MicroState(0.3, ComplexField(g, Samples<Complex>::Ones(32, 1))), o);
    CHECK((traj.states.back().wave().values - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("invalid states are rejected")
{
    Grid g(16, 1.0);
    CHECK_THROWS(MicroState(0.0, ComplexField(g, 1)));
    CHECK_THROWS(MicroState(1.5, ComplexField(g, 1)));
    CHECK_THROWS(MicroState(0.5, RealField(g, 4)));
    auto gp = preset(ModelKind::gp_scalar).second;
    MicroOptions o;
    CHECK_THROWS(evolve_micro(gp, MicroState(0.5, RealField(g, 3)), o));
    // |u| = 0 lies outside the chart
    CHECK_THROWS_AS(micro_rhs(gp, MicroState(0.5, ComplexField(g, 1))), ChartBreakdown);
}

TEST_CASE("GP right-hand side matches the transformed lab equation")
{
    // Gamma(s, y) = u(eps^3 s, eps (y - c s)) gives u_t = Gamma_s / eps^3 + c u_x / eps^2,
    // Gamma_s = i (Gamma_yy / 2 - Gamma (|Gamma|^2 - 1)), Gamma_y = eps u_x.
    const double eps = 0.1;
    Grid g(512, 2.0 * kPi);
    ComplexField u(g, 1);
    const Eigen::ArrayXd phi = 0.1 * g.points().sin();
    for (int j = 0; j < 512; ++j) u.values(j, 0) = std::exp(kI * (eps * phi(j)));
    const auto spec = preset(ModelKind::gp_scalar).second;
    const Samples<Complex> ux = fd(u.values, g.spacing(), 1), uxx = fd(u.values, g.spacing(), 2);
    const Samples<Complex> gs = kI * (0.5 * eps * eps * uxx - u.values * (u.values.abs2() - 1.0));
    const Samples<Complex> oracle = gs / std::pow(eps, 3) + ux / (eps * eps);
    const Samples<Complex> rhs = micro_rhs(spec, MicroState(eps, u)).wave().values;
    const double rel = std::sqrt((rhs - oracle).abs2().sum() / oracle.abs2().sum());
    CHECK(rel < 1e-6);
}

TEST_CASE("spin right-hand sides match the transformed lab equations")
{
    // Lab frame: LL  Gamma_s = Gamma x (Gamma_yy / 2 - V'(Gamma_3) e3)
    //            AF  u_s = u x (u_yy / 2 - v_y - 2 v),  v_s = v x (v_yy / 2 + u_y - 2 u)
    const double eps = 0.3;
    Grid g(512, 2.0 * kPi);
    for (ModelKind kind : {ModelKind::ll_easy_plane, ModelKind::ll_easy_cone, ModelKind::af_chain}) {
        ModelParams p;
        p.beta = 0.4;
        auto [geo, spec] = preset(kind, p);
        const MicroState s = well_prepared_init(spec, geo, profile(g, 0.4, geo.dim), eps);
        const Samples<double>& a = s.spins().values;
        const Samples<double> ay = eps * fd(a, g.spacing(), 1), ayy = eps * eps * fd(a, g.spacing(), 2);
        Samples<double> gs(a.rows(), a.cols());
        if (spec.is_ll()) {
            Samples<double> h = 0.5 * ayy;
            for (int j = 0; j < g.size(); ++j) h(j, 2) -= spec.ll_potential_derivative(a(j, 2));
            gs = cross(a, h);
        } else {
            const Samples<double> u = a.leftCols(3), v = a.rightCols(3);
            gs.leftCols(3) = cross(u, 0.5 * ayy.leftCols(3) - ay.rightCols(3) - 2.0 * v);
            gs.rightCols(3) = cross(v, 0.5 * ayy.rightCols(3) + ay.leftCols(3) - 2.0 * u);
        }
        const Samples<double> oracle = gs / std::pow(eps, 3) + sound_speed(spec) * ay / std::pow(eps, 3);
        const Samples<double> rhs = micro_rhs(spec, s).spins().values;
        const double rel = std::sqrt((rhs - oracle).square().sum() / oracle.square().sum());
        CHECK_MESSAGE(rel < 1e-6, to_string(kind));
    }
}

TEST_CASE("linearized GP oscillates at the Bogoliubov frequencies")
{
    // w = u - 1 = a + i b; for the mode e^{ikx}:
    //   a' = (ick a + eps k^2 b / 2) / eps^2,  b' = (ick b - (eps k^2 / 2 + 2 / eps) a) / eps^2
    const double eps = 0.5, c = 1.0, amp = 1e-6;
    const int kmode = 1;
    Grid g(32, 2.0 * kPi);
    const double k = kmode;
    Eigen::Matrix2cd m;
    m << Complex(0, c * k), 0.5 * eps * k * k, -(0.5 * eps * k * k + 2.0 / eps), Complex(0, c * k);
    m /= eps * eps;
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(m);
    const Eigen::Matrix2cd vinv = es.eigenvectors().inverse();
    const Eigen::Vector2d omega_oracle = es.eigenvalues().imag();
    // closed form (c k +- k sqrt(1 + eps^2 k^2 / 4)) / eps^2
    const double root = k * std::sqrt(1.0 + 0.25 * eps * eps * k * k);
    CHECK(std::max(omega_oracle(0), omega_oracle(1)) == doctest::Approx((c * k + root) / (eps * eps)));
    CHECK(std::min(omega_oracle(0), omega_oracle(1)) == doctest::Approx((c * k - root) / (eps * eps)));

    ComplexField u(g, 1);
    u.values.col(0) = 1.0 + amp * (kmode * g.points()).cos().cast<Complex>();
    auto coeffs = [&](const ComplexField& f) {
        const Eigen::ArrayXcd w = f.values.col(0) - 1.0;
        const Eigen::ArrayXcd fa = fft_forward(w.real().cast<Complex>()), fb = fft_forward(w.imag().cast<Complex>());
        return Eigen::Vector2cd(vinv * Eigen::Vector2cd(fa(kmode), fb(kmode)));
    };
    MicroOptions o;
    o.t_final = 2.0;
    o.dt = eps * eps / 200.0;
    o.snapshot_every = 2;
    const auto traj = evolve_micro(preset(ModelKind::gp_scalar).second, MicroState(eps, u), o);
    REQUIRE_FALSE(traj.aborted);
    Eigen::Vector2d phase = Eigen::Vector2d::Zero();
    Eigen::Vector2cd prev = coeffs(traj.states.front().wave());
    for (std::size_t n = 1; n < traj.states.size(); ++n) {
        const Eigen::Vector2cd cur = coeffs(traj.states[n].wave());
        for (int i = 0; i < 2; ++i) phase(i) += std::arg(cur(i) / prev(i));
        prev = cur;
    }
    for (int i = 0; i < 2; ++i) {
        const double measured = phase(i) / traj.times.back();
        CHECK(std::abs(measured - omega_oracle(i)) <= 0.01 * std::abs(omega_oracle(i)));
    }
}

TEST_CASE("GP split-step conserves mass and nearly conserves energy")
{
    const double eps = 0.2;
    Grid g(256, 32.0);
    auto [geo, spec] = preset(ModelKind::gp_scalar);
    RealField a0(g, 1);
    a0.values.col(0) = 0.3 * ((g.points() - 16.0) / 2.0).cosh().inverse().square();
    a0.values -= a0.values.mean();
    const MicroState s0 = well_prepared_init(spec, geo, a0, eps);
    MicroOptions o;
    o.t_final = 0.2;
    o.snapshot_every = 10;
    const auto traj = evolve_micro(spec, s0, o);
    REQUIRE_FALSE(traj.aborted);
    const auto i0 = micro_invariants(spec, s0);
    double dm = 0.0, de = 0.0;
    for (const auto& s : traj.states) {
        const auto inv = micro_invariants(spec, s);
        dm = std::max(dm, std::abs(inv.mass - i0.mass) / i0.mass);
        de = std::max(de, std::abs(inv.energy - i0.energy) / i0.energy);
    }
    CHECK(dm <= 1e-10);
    CHECK(de <= 1e-6);
}

TEST_CASE("rescaled run agrees with the lab frame")
{
    const double eps = 0.2, t = 0.02;
    Grid g(256, 32.0);
    auto [geo, spec] = preset(ModelKind::gp_scalar);
    RealField a0(g, 1);
    a0.values.col(0) = 0.3 * ((g.points() - 16.0) / 2.0).cosh().inverse().square();
    a0.values -= a0.values.mean();
    const MicroState s0 = well_prepared_init(spec, geo, a0, eps);
    MicroOptions o;
    o.t_final = t;
    const ComplexField u = evolve_micro(spec, s0, o).states.back().wave();

    const Grid lab(256, 32.0 / eps);
    const double s = t / std::pow(eps, 3);
    const ComplexField gamma = evolve_gp_lab(spec, ComplexField(lab, s0.wave().values), s, 1e-3);
    // u(t, x) = Gamma(s, x / eps + c s)
    const ComplexField back = translate(gamma, -s);
    const double err = std::sqrt((back.values - u.values).abs2().sum() * g.spacing());
    CHECK(err <= 1e-4);
}

TEST_CASE("LL unit norm survives ten thousand steps")
{
    const double eps = 0.5;
    Grid g(64, 2.0 * kPi);
    auto [geo, spec] = preset(ModelKind::ll_easy_plane);
    const MicroState s0 = well_prepared_init(spec, geo, profile(g, 0.3), eps);
    MicroOptions o;
    o.dt = 1e-4;
    o.t_final = 1.0;
    const auto traj = evolve_micro(spec, s0, o);
    REQUIRE_FALSE(traj.aborted);
    CHECK(traj.steps == 10000);
    CHECK(traj.max_norm_deviation <= 1e-12);
}

TEST_CASE("spin energies are conserved along the flow")
{
    const double eps = 0.3;
    Grid g(64, 2.0 * kPi);
    for (ModelKind kind : {ModelKind::ll_easy_plane, ModelKind::ll_easy_cone, ModelKind::af_chain}) {
        auto [geo, spec] = preset(kind);
        const MicroState s0 = well_prepared_init(spec, geo, profile(g, 0.3, geo.dim), eps);
        MicroOptions o;
        o.t_final = 0.2;
        o.snapshot_every = 50;
        const auto traj = evolve_micro(spec, s0, o);
        REQUIRE_FALSE(traj.aborted);
        CHECK(traj.max_norm_deviation <= 1e-10);
        const auto i0 = micro_invariants(spec, s0);
        for (const auto& s : traj.states) {
            const auto inv = micro_invariants(spec, s);
            CHECK_MESSAGE(std::abs(inv.energy - i0.energy) <= 1e-7 * std::abs(i0.energy), to_string(kind));
            CHECK_MESSAGE(std::abs(inv.momentum - i0.momentum) <= 1e-7 * std::max(1e-3, std::abs(i0.momentum)), to_string(kind));
        }
    }
}

TEST_CASE("invariants of simple states")
{
    Grid g(64, 2.0 * kPi);
    auto gp = preset(ModelKind::gp_scalar).second;
    const auto one = micro_invariants(gp, MicroState(0.5, ComplexField(g, Samples<Complex>::Ones(64, 1))));
    CHECK(one.energy == 0.0);
    CHECK(one.momentum == 0.0);
    CHECK(one.mass == doctest::Approx(2.0 * kPi));

    // Gamma = (cos(0.1 sin x), sin(0.1 sin x), 0): E = int (0.1 cos x)^2 / 2 = 0.005 pi
    auto ll = preset(ModelKind::ll_easy_plane).second;
    RealField s(g, 3);
    const Eigen::ArrayXd psi = 0.1 * g.points().sin();
    s.values.col(0) = psi.cos();
    s.values.col(1) = psi.sin();
    CHECK(micro_invariants(ll, MicroState(1.0, s)).energy == doctest::Approx(0.005 * kPi).epsilon(1e-12));
}

TEST_CASE("well-prepared data")
{
    Grid g(64, 2.0 * kPi);
    for (ModelKind kind : {ModelKind::gp_scalar, ModelKind::gp_coupled, ModelKind::ll_easy_plane, ModelKind::ll_easy_cone,
                           ModelKind::af_chain}) {
        auto [geo, spec] = preset(kind);
        const MicroState rest = well_prepared_init(spec, geo, RealField(g, geo.dim), 0.2);
        CHECK(max_abs(micro_rhs(spec, rest)) < 1e-12);

        RealField biased = profile(g, 0.2, geo.dim);
        biased.values += 0.1;
        CHECK_THROWS_AS(well_prepared_init(spec, geo, biased, 0.2), std::invalid_argument);
    }
    auto [geo, spec] = preset(ModelKind::ll_easy_plane);
    const RealField eq = well_prepared_init(spec, geo, RealField(g, 1), 0.2).spins();
    CHECK((eq.values.col(0) - 1.0).abs().maxCoeff() == 0.0);
}
