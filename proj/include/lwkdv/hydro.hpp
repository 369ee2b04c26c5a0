#pragma once

#include "lwkdv/kdv.hpp"
#include "lwkdv/micro.hpp"
#include "lwkdv/models.hpp"

#include <string>
#include <vector>

namespace lwkdv {

// Chart coordinates u = Psi(Phi(eps phi), eps^2 n). phi holds tangent coordinates; nu holds the
// coordinates of n in the basis -i tau_j, so that i n has tangent coordinates nu.
struct HydroState {
    double eps = 1.0;
    RealField phi;
    RealField nu;
    bool valid = true;
    std::string diagnostic;
    int bad_index = -1;

    HydroState(double e, RealField p, RealField n) : eps(e), phi(std::move(p)), nu(std::move(n)) {}
    const Grid& grid() const { return phi.grid; }
};

// Chart radius for eps |phi|: half a turn around the Lagrangian circle.
constexpr double kChartRadius = 3.141592653589793;

// previous, when given, fixes the branch of the unwrapped phase by temporal continuity.
HydroState extract_hydro(const MicroModelSpec& spec, const MicroState& s, const HydroState* previous = nullptr);
std::vector<HydroState> extract_trajectory(const MicroModelSpec& spec, const std::vector<MicroState>& states);

MicroState reconstruct_micro(const MicroModelSpec& spec, const HydroState& h);

struct Observables {
    RealField W;
    RealField U;
    RealField A;
};

Observables observables(const GeometryData& g, const HydroState& h);

struct AlmostHamiltonian {
    double value = 0.0;
    double leading = 0.0;  // |W|^2 / (4 lambda)
};

AlmostHamiltonian almost_hamiltonian(const GeometryData& g, const HydroState& h);

struct HydroResidual {
    std::vector<double> times;
    std::vector<double> phase_line;      // L2 residual of the phase equation
    std::vector<double> amplitude_line;  // L2 residual of the amplitude equation
    std::vector<double> combined;
    double max_combined = 0.0;
};

// Time derivatives by fourth-order centered differences on uniformly spaced snapshots.
// include_singular = false drops the O(1/eps^2) transport terms (wiring check).
HydroResidual hydro_residual(const GeometryData& g, const std::vector<double>& times,
                             const std::vector<HydroState>& states, bool include_singular = true);

struct LimitError {
    std::vector<double> times;
    std::vector<double> amplitude_error;  // |2 lambda nu - A|
    std::vector<double> phase_error;      // |(c + J) phi_x - A|
    std::vector<double> w_norm;           // |W|
    std::vector<double> phase_sup;        // eps |phi|_inf
    std::vector<double> energy_proxy;     // |phi_x|_H2 + |nu|_H2
    double sup_amplitude_error = 0.0;
    double sup_phase_error = 0.0;
    double sup_w_norm = 0.0;
    double sup_phase = 0.0;
    double max_energy_ratio = 0.0;  // sup over t of proxy(t) / proxy(0)
};

// The KdV trajectory solves the raw limit equation; snapshot times must match.
LimitError limit_error(const GeometryData& g, const std::vector<double>& micro_times,
                       const std::vector<HydroState>& hydro, const Trajectory<double>& kdv);

}  // namespace lwkdv
