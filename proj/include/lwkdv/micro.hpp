#pragma once

#include "lwkdv/field.hpp"
#include "lwkdv/models.hpp"

#include <string>
#include <variant>
#include <vector>

namespace lwkdv {

// Microscopic field in the KdV scaling. GP carries complex components; LL carries one unit
// vector per point (3 columns), AF two (6 columns: u then v).
struct MicroState {
    double eps = 1.0;
    std::variant<ComplexField, RealField> payload;

    MicroState(double e, ComplexField wave);
    MicroState(double e, RealField spins);

    bool is_wave() const { return std::holds_alternative<ComplexField>(payload); }
    const ComplexField& wave() const { return std::get<ComplexField>(payload); }
    ComplexField& wave() { return std::get<ComplexField>(payload); }
    const RealField& spins() const { return std::get<RealField>(payload); }
    RealField& spins() { return std::get<RealField>(payload); }
    const Grid& grid() const;
};

struct ChartBreakdown : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double sound_speed(const MicroModelSpec& spec);

// Time derivative in the rescaled frame.
MicroState micro_rhs(const MicroModelSpec& spec, const MicroState& s);

struct MicroOptions {
    double t_final = 1.0;
    double dt = 0.0;          // 0 selects the default step
    int snapshot_every = 0;   // steps between snapshots; 0 keeps only the endpoints
    int splitting_order = 4;  // GP only: 2 (Strang) or 4 (triple jump of Strang steps)
    bool dealias = true;      // 2/3-rule truncation after each step
};

struct MicroTrajectory {
    std::vector<double> times;
    std::vector<MicroState> states;
    bool aborted = false;
    std::string status = "ok";
    long steps = 0;
    double dt = 0.0;
    double max_norm_deviation = 0.0;  // LL/AF, after every step
};

double default_micro_dt(const MicroModelSpec& spec, const Grid& grid, double eps);

MicroTrajectory evolve_micro(const MicroModelSpec& spec, const MicroState& s0, const MicroOptions& opts);

struct MicroInvariants {
    double energy = 0.0;
    double momentum = 0.0;
    double mass = 0.0;  // GP: integral of |u|^2
};

MicroInvariants micro_invariants(const MicroModelSpec& spec, const MicroState& s);

// Largest | |Gamma| - 1 | over all points and spheres (0 for GP).
double unit_norm_deviation(const MicroModelSpec& spec, const MicroState& s);

// Initial state whose chart coordinates reproduce A0 in both limit observables.
MicroState well_prepared_init(const MicroModelSpec& spec, const GeometryData& g, const RealField& a0, double eps);

// Chart point from tangent coordinates phi and normal coordinates nu.
MicroState chart_to_state(const MicroModelSpec& spec, const RealField& phi, const RealField& nu, double eps);

// Lab-frame GP, Gamma_s = i(Gamma_yy/2 - V'(Gamma)), Strang split-step.
ComplexField evolve_gp_lab(const MicroModelSpec& spec, const ComplexField& gamma0, double s_final, double ds);

}  // namespace lwkdv
