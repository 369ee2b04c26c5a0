#pragma once

#include "lwkdv/field.hpp"
#include "lwkdv/tensor.hpp"

#include <limits>
#include <string>
#include <vector>

namespace lwkdv {

// Flux form: du/dt = delta u_xxx - a u_x - d/dx Q(u,u).
// Raw form:  du/dt = delta u_xxx - a u_x + w T(u_x, u).
struct KdvEquation {
    enum class Form { flux, raw };

    Form form = Form::flux;
    double dispersion = 1.0;
    double advection = 0.0;
    Tensor3 nonlinearity{1};
    double nonlinear_weight = 1.0;

    int dim() const { return nonlinearity.dim(); }
    Complex linear_symbol(double k) const;
};

// t' = time_factor * t, u = amplitude * A.
struct Rescaling {
    double time_factor = 1.0;
    double amplitude = 1.0;
};

// Limit equation 2c A_t = A_xxx / 4 + T(A_x, A), plus its flux form when T is fully symmetric.
struct LimitModel {
    int dim = 1;
    double sound_speed = 1.0;
    Tensor3 raw_nonlinearity{1};
    KdvEquation raw;
    bool has_canonical = false;
    KdvEquation canonical;
    Rescaling rescaling;
    std::string diagnostic;

    RealField to_canonical(const RealField& a) const;
    RealField from_canonical(const RealField& u) const;
    double canonical_time(double t) const { return rescaling.time_factor * t; }
};

LimitModel make_limit_model(double sound_speed, const Tensor3& raw_nonlinearity);

// Canonical equation with the given symmetric Q.
KdvEquation canonical_kdv(const Tensor3& q, double dispersion = 1.0);

RealField kdv_nonlinear_rhs(const KdvEquation& eq, const RealField& u);
RealField kdv_rhs(const KdvEquation& eq, const RealField& u);

template <typename Scalar>
struct Trajectory {
    std::vector<double> times;
    std::vector<Field<Scalar>> snapshots;
    bool breakdown = false;
    double breakdown_time = std::numeric_limits<double>::quiet_NaN();
    std::string status = "ok";
    long steps = 0;
};

class BlowupMonitor {
public:
    explicit BlowupMonitor(double factor = 50.0) : factor_(factor) {}

    // Returns true once breakdown has been detected.
    bool observe(double t, const RealField& u);

    bool triggered() const { return triggered_; }
    double time() const { return time_; }
    const std::vector<double>& max_gradient() const { return max_grad_; }

private:
    double factor_;
    double initial_ = -1.0;
    bool triggered_ = false;
    double time_ = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> max_grad_;
};

struct BlowupReport {
    bool breakdown = false;
    double time = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> max_gradient;
};

BlowupReport blowup_monitor(const Trajectory<double>& traj, double factor = 50.0);

struct EvolveOptions {
    double t_final = 1.0;
    double dt = 1e-3;
    int snapshot_every = 0;  // steps between snapshots; 0 keeps only the endpoints
    bool monitor_blowup = false;
    double blowup_factor = 50.0;
};

Trajectory<double> evolve_kdv(const KdvEquation& eq, const RealField& u0, const EvolveOptions& opts);

struct ConservedQuantities {
    Eigen::VectorXd momentum;  // integral of u
    double mass = 0.0;         // half the squared L2 norm
    double hamiltonian = 0.0;  // delta/2 |u_x|^2 + Q(u,u).u / 3
};

ConservedQuantities conserved_quantities(const KdvEquation& eq, const RealField& u);

// Integral of Q(u,u).u computed exactly for band-limited u.
double cubic_integral(const Tensor3& q, const RealField& u);

struct CharacteristicField {
    enum class Status { genuinely_nonlinear, linearly_degenerate, clustered };
    double eigenvalue = 0.0;
    Eigen::VectorXd eigenvector;
    double nonlinearity = 0.0;  // 2 Q(r, r).r
    Status status = Status::linearly_degenerate;
};

std::vector<CharacteristicField> genuine_nonlinearity(const Tensor3& q, const Eigen::VectorXd& u,
                                                      double cluster_tol = 1e-8, double degenerate_tol = 1e-10);

}  // namespace lwkdv
