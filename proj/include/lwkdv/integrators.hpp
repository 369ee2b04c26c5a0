#pragma once

#include "lwkdv/field.hpp"

#include <stdexcept>
#include <string>

namespace lwkdv {

struct StepRejected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename State>
void require_finite(const State& u, const char* where)
{
    if (!all_finite(u)) throw StepRejected(std::string("non-finite state in ") + where);
}

// Classical fourth-order Runge-Kutta.
template <typename State, typename Rhs>
State rk4_step(const State& u, Rhs&& rhs, double dt)
{
    const State k1 = rhs(u);
    const State k2 = rhs(u + (0.5 * dt) * k1);
    const State k3 = rhs(u + (0.5 * dt) * k2);
    const State k4 = rhs(u + dt * k3);
    State out = u + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
    require_finite(out, "rk4_step");
    return out;
}

// Integrating-factor RK4. propagate(v, tau) applies exp(L tau); rhs is the remaining part.
template <typename State, typename Propagate, typename Rhs>
State ifrk4_step(const State& u, Propagate&& propagate, Rhs&& rhs, double dt)
{
    const double h = 0.5 * dt;
    const State k1 = rhs(u);
    const State uh = propagate(u, h);
    const State k2 = rhs(uh + h * propagate(k1, h));
    const State k3 = rhs(uh + h * k2);
    const State k4 = rhs(propagate(u, dt) + dt * propagate(k3, h));
    State out = propagate(u + (dt / 6.0) * k1, dt) + (dt / 6.0) * (propagate(2.0 * (k2 + k3), h) + k4);
    require_finite(out, "ifrk4_step");
    return out;
}

}  // namespace lwkdv
