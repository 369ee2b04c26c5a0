#pragma once

#include "lwkdv/field.hpp"
#include "lwkdv/kdv.hpp"
#include "lwkdv/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lwkdv {

// q(xi) = amplitude * sech^2(width * xi). The defaults solve q - q'' + q^2 = 0.
struct SechProfile {
    double amplitude = -1.5;
    double width = 0.5;

    double operator()(double xi) const;
};

struct SolitonSpec {
    double speed = 1.0;
    Eigen::VectorXd direction;  // Q(z, z) = z
    SechProfile profile;
    double center = 0.0;
};

struct FixedPointSearch {
    std::vector<Eigen::VectorXd> roots;
    std::vector<double> residuals;
    int starts = 0;
    int converged = 0;
    std::string report;

    bool found() const { return !roots.empty(); }
};

// Newton with backtracking on Q(z,z) - z from a single start. Returns false if it stalls.
bool newton_fixed_point(const Tensor3& q, Eigen::VectorXd& z, double tol = 1e-12, int max_iter = 100);

// Multi-start search over random unit seeds and rescaled Jacobian eigenvectors; zero is excluded.
FixedPointSearch find_fixed_points(const Tensor3& q, std::uint64_t seed = 0, int random_starts = 32);

// u(x) = c q(sqrt(c)(x - x0)) z. Throws if the tails are not negligible at the boundary.
RealField build_soliton(const SolitonSpec& spec, const Grid& grid);

// L2 norm of c P' - P''' + d/dx Q(P, P), spectral derivatives. Zero for travelling waves of speed c.
double profile_ode_residual(const Tensor3& q, const RealField& profile, double speed = 1.0);
// Residual of the unit-speed profile q(x - L/2) z.
double soliton_ode_residual(const Tensor3& q, const Eigen::VectorXd& z, const Grid& grid,
                            const SechProfile& profile = {});

double miura_condition(const Tensor3& q);

// v_x + Q(v, v) / 3
RealField miura_map(const Tensor3& q, const RealField& v);

// v_xxx - 2/3 Q(v, Q(v, v_x)), cubic term on a 2N grid.
RealField mkdv_nonlinear_rhs(const Tensor3& q, const RealField& v);
Trajectory<double> evolve_mkdv(const Tensor3& q, const RealField& v0, const EvolveOptions& opts);

struct MiuraCheck {
    std::vector<double> times;
    std::vector<double> discrepancy;  // L2
    double sup = 0.0;
};

// Throws if the commutation condition fails beyond 1e-10.
MiuraCheck miura_crosscheck(const Tensor3& q, const RealField& v0, double t_final, double dt, int snapshot_every = 0);

// Q on C = R^2: a x y + b conj(x y) + conj(a) (conj(x) y + x conj(y)).
Tensor3 complex_q_d2(Complex alpha, Complex beta);

struct ShiftedError {
    double shift = 0.0;
    double relative = 0.0;  // |u - ref(. - shift)| / |ref|
};

// Cross-correlation for the best grid shift, then a continuous refinement.
ShiftedError shift_minimized_error(const RealField& u, const RealField& ref);

}  // namespace lwkdv
