#pragma once

#include <cmath>
#include <numbers>

#include "grn/rng.hpp"

namespace grn {

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Cart position/velocity and pole angle/angular velocity. Angles in radians.
struct CartState {
    double x = 0.0;
    double theta = 0.0;
    double x_dot = 0.0;
    double theta_dot = 0.0;
};

struct CartParams {
    double gravity = 9.8;      // m/s^2
    double pole_half_len = 0.5; // m
    double pole_mass = 0.1;    // kg
    double cart_mass = 1.0;    // kg
    double force_mag = 10.0;   // N
    double dt = 0.02;          // s
};

enum class Action { Left, Right };

inline double action_force(Action a, const CartParams& p) {
    return a == Action::Right ? p.force_mag : -p.force_mag;
}

// Track and angle limits; failure comparisons are strict so the boundary
// values themselves do not fail.
inline constexpr double kTrackLimit = 2.4;                       // m
inline constexpr double kAngleLimit = deg_to_rad(12.0);          // rad
inline constexpr double kCartVelLimit = 1.0;                     // m/s
inline constexpr double kAngVelLimit = deg_to_rad(1.5);          // rad/s

struct Accelerations {
    double theta_ddot = 0.0;
    double x_ddot = 0.0;
};

/// Frictionless cart-pole equations of motion (Barto et al. benchmark form).
inline Accelerations accelerations(const CartState& s, double force, const CartParams& p) {
    const double total_mass = p.cart_mass + p.pole_mass;
    const double sin_t = std::sin(s.theta);
    const double cos_t = std::cos(s.theta);
    const double temp = (force + p.pole_mass * p.pole_half_len * s.theta_dot * s.theta_dot * sin_t) / total_mass;
    const double theta_ddot =
        (p.gravity * sin_t - cos_t * temp) /
        (p.pole_half_len * (4.0 / 3.0 - p.pole_mass * cos_t * cos_t / total_mass));
    const double x_ddot = (force + p.pole_mass * p.pole_half_len *
                                       (s.theta_dot * s.theta_dot * sin_t - theta_ddot * cos_t)) /
                          total_mass;
    return {theta_ddot, x_ddot};
}

/// One 0.02 s step of semi-explicit Euler: positions advance with the
/// pre-step velocities, then velocities advance with the accelerations.
inline CartState step(const CartState& s, Action action, const CartParams& p) {
    const Accelerations acc = accelerations(s, action_force(action, p), p);
    CartState n;
    n.x = s.x + p.dt * s.x_dot;
    n.x_dot = s.x_dot + p.dt * acc.x_ddot;
    n.theta = s.theta + p.dt * s.theta_dot;
    n.theta_dot = s.theta_dot + p.dt * acc.theta_ddot;
    return n;
}

/// True iff the cart left the track or the pole fell (strict bounds).
inline bool is_failure(const CartState& s) {
    return std::abs(s.x) > kTrackLimit || std::abs(s.theta) > kAngleLimit;
}

/// Uniform random state over the benchmark input ranges (always non-failing).
inline CartState random_state(Rng& rng) {
    CartState s;
    s.x = rng.uniform(-kTrackLimit, kTrackLimit);
    s.theta = rng.uniform(-kAngleLimit, kAngleLimit);
    s.x_dot = rng.uniform(-kCartVelLimit, kCartVelLimit);
    s.theta_dot = rng.uniform(-kAngVelLimit, kAngVelLimit);
    return s;
}

} // namespace grn
