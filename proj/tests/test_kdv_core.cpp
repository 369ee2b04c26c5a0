#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lwkdv/kdv.hpp"
#include "lwkdv/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace lwkdv;

namespace {

const double kPi = std::numbers::pi;

RealField smooth_data(const Grid& g)
{
    RealField u(g, 1);
    const Eigen::ArrayXd x = g.points() * (2.0 * kPi / g.length());
    u.values.col(0) = 0.5 * x.sin() + 0.3 * (2.0 * x).cos();
    return u;
}

Tensor3 random_symmetric(int d, std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Tensor3 t(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) t(i, j, k) = n(rng);
    return t.symmetrized();
}

}  // namespace

TEST_CASE("scalar limit model rescales to Q(u,u) = u^2")
{
    LimitModel m = make_limit_model(1.0, Tensor3::diagonal(1, -3.0));
    REQUIRE(m.has_canonical);
    CHECK(m.raw.dispersion == doctest::Approx(1.0 / 8.0));
    CHECK(m.raw.nonlinear_weight == doctest::Approx(0.5));
    CHECK(m.rescaling.amplitude == doctest::Approx(6.0));
    CHECK(m.rescaling.time_factor == doctest::Approx(1.0 / 8.0));
    CHECK(std::abs(m.canonical.nonlinearity(0, 0, 0) - 1.0) < 1e-15);
}

TEST_CASE("stored change of variables maps raw to canonical")
{
    std::mt19937_64 rng(11);
    for (int d : {1, 2, 3}) {
        const Tensor3 t = random_symmetric(d, rng);
        const double c = 0.7 + d;
        LimitModel m = make_limit_model(c, t);
        REQUIRE(m.has_canonical);
        Tensor3 back = (-2.0 / m.rescaling.amplitude) * t;
        double worst = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k) worst = std::max(worst, std::abs(back(i, j, k) - m.canonical.nonlinearity(i, j, k)));
        CHECK(worst <= 1e-12);

        // Right-hand sides agree under u = kappa A, t' = t/(8c).
        Grid g(64, 20.0);
        RealField a(g, d);
        const Eigen::ArrayXd x = g.points();
        for (int q = 0; q < d; ++q) a.values.col(q) = 0.2 * (-(x - 10.0 - q).square()).exp();
        const RealField lhs = kdv_rhs(m.canonical, m.to_canonical(a));
        const RealField rhs = (m.rescaling.amplitude / m.rescaling.time_factor) * kdv_rhs(m.raw, a);
        CHECK((lhs.values - rhs.values).abs().maxCoeff() < 1e-10 * std::max(1.0, rhs.values.abs().maxCoeff()));
    }
}

TEST_CASE("non-symmetric raw nonlinearity stays raw with a diagnostic")
{
    Tensor3 t(2);
    t(1, 1, 0) = 1.0;
    LimitModel m = make_limit_model(1.0, t);
    CHECK_FALSE(m.has_canonical);
    CHECK(m.diagnostic.find("symmetric") != std::string::npos);
    Grid g(16, 1.0);
    CHECK_THROWS(m.to_canonical(RealField(g, 2)));
}

TEST_CASE("zero nonlinearity equals the composed linear propagator")
{
    Grid g(128, 2.0 * kPi);
    KdvEquation eq = canonical_kdv(Tensor3(1), 1.0 / 8.0);
    const RealField u0 = smooth_data(g);
    for (int steps : {1, 7, 40}) {
        EvolveOptions o;
        o.dt = 0.01;
        o.t_final = steps * 0.01;
        const RealField u = evolve_kdv(eq, u0, o).snapshots.back();
        RealField ref = u0;
        for (int n = 0; n < steps; ++n) ref = advance_linear(ref, [&](double k) { return eq.linear_symbol(k); }, 0.01);
        CHECK((u.values - ref.values).abs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("mass, momentum and Hamiltonian are conserved")
{
    Grid g(256, 2.0 * kPi);
    KdvEquation eq = canonical_kdv(Tensor3::diagonal(1, 1.0));
    const RealField u0 = smooth_data(g);
    EvolveOptions o;
    o.t_final = 1.0;
    o.dt = 1e-3;
    o.snapshot_every = 100;
    const auto traj = evolve_kdv(eq, u0, o);
    REQUIRE_FALSE(traj.breakdown);
    const auto c0 = conserved_quantities(eq, u0);
    double dm = 0.0, dh = 0.0, dp = 0.0;
    for (const auto& u : traj.snapshots) {
        const auto c = conserved_quantities(eq, u);
        dm = std::max(dm, std::abs(c.mass - c0.mass) / std::abs(c0.mass));
        dh = std::max(dh, std::abs(c.hamiltonian - c0.hamiltonian) / std::abs(c0.hamiltonian));
        dp = std::max(dp, std::abs(c.momentum(0) - c0.momentum(0)));
    }
    CHECK(dm <= 1e-8);
    CHECK(dh <= 1e-8);
    CHECK(dp <= 1e-10);
}

TEST_CASE("time reversal returns the initial data")
{
    Grid g(128, 2.0 * kPi);
    KdvEquation eq = canonical_kdv(Tensor3::diagonal(1, 1.0));
    const RealField u0 = smooth_data(g);
    EvolveOptions o;
    o.t_final = 0.5;
    o.dt = 1e-3;
    const RealField u1 = evolve_kdv(eq, u0, o).snapshots.back();
    o.t_final = -0.5;
    const RealField back = evolve_kdv(eq, u1, o).snapshots.back();
    CHECK((back.values - u0.values).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("cubic integral is exact for band-limited data")
{
    Grid g(16, 2.0 * kPi);
    RealField u(g, 1);
    const Eigen::ArrayXd x = g.points();
    u.values.col(0) = (7.0 * x).cos();
    // integral of cos^3(7x) over a period is zero; cos(7x)^2 * cos(7x) has a k = 21 alias at N = 16
    CHECK(std::abs(cubic_integral(Tensor3::diagonal(1, 1.0), u)) < 1e-13);
    u.values.col(0) = 1.0 + x.cos();
    // integral of (1 + cos)^3 = 2 pi (1 + 3/2)
    CHECK(cubic_integral(Tensor3::diagonal(1, 1.0), u) == doctest::Approx(2.0 * kPi * 2.5).epsilon(1e-13));
}

TEST_CASE("flux Jacobian eigenstructure")
{
    auto scalar = genuine_nonlinearity(Tensor3::diagonal(1, 1.0), Eigen::VectorXd::Ones(1));
    CHECK(scalar[0].eigenvalue == doctest::Approx(2.0));
    CHECK(std::abs(scalar[0].nonlinearity) == doctest::Approx(2.0));
    CHECK(scalar[0].status == CharacteristicField::Status::genuinely_nonlinear);

    auto flat = genuine_nonlinearity(Tensor3(2), Eigen::Vector2d(0.3, -1.0));
    for (const auto& f : flat) {
        CHECK(f.nonlinearity == 0.0);
        CHECK(f.eigenvalue == 0.0);
        CHECK(f.status == CharacteristicField::Status::clustered);
    }
    auto line = genuine_nonlinearity(Tensor3(1), Eigen::VectorXd::Ones(1));
    CHECK(line[0].status == CharacteristicField::Status::linearly_degenerate);

    // Symmetric Q gives a symmetric Jacobian, hence real eigenvalues and an orthonormal basis.
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Tensor3 q = random_symmetric(3, rng);
        const Eigen::Vector3d u = Eigen::Vector3d::Random();
        const Eigen::MatrixXd jac = 2.0 * q.partial(u);
        CHECK((jac - jac.transpose()).cwiseAbs().maxCoeff() < 1e-13);
        auto fields = genuine_nonlinearity(q, u);
        for (const auto& f : fields) {
            CHECK((jac * f.eigenvector - f.eigenvalue * f.eigenvector).norm() < 1e-12);
            CHECK(f.nonlinearity == doctest::Approx(2.0 * q.apply(f.eigenvector, f.eigenvector).dot(f.eigenvector)));
        }
    }
}

TEST_CASE("dispersionless Burgers breaks down near the characteristics time")
{
    // u_t + (u^2)_x = 0, u0 = sin x: t* = 1 / max(-2 cos x) = 1/2
    Grid g(512, 2.0 * kPi);
    KdvEquation eq = canonical_kdv(Tensor3::diagonal(1, 1.0), 0.0);
    RealField u0(g, 1);
    u0.values.col(0) = g.points().sin();
    EvolveOptions o;
    o.t_final = 1.0;
    o.dt = 1e-3;
    o.monitor_blowup = true;
    const auto traj = evolve_kdv(eq, u0, o);
    REQUIRE(traj.breakdown);
    CHECK(std::abs(traj.breakdown_time - 0.5) <= 0.1);
    CHECK(blowup_monitor(traj).breakdown);
}

TEST_CASE("a constant state never triggers the monitor")
{
    Grid g(32, 1.0);
    BlowupMonitor mon;
    RealField c(g, Samples<double>::Constant(32, 1, 2.0));
    for (int n = 0; n < 5; ++n) CHECK_FALSE(mon.observe(n, c));
}
