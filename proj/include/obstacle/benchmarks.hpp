#pragma once

#include <array>
#include <functional>
#include <string>

#include "obstacle/fem.hpp"

namespace obstacle {

enum class BenchmarkId { I, II, III };

std::string to_string(BenchmarkId id);
BenchmarkId benchmark_from_string(const std::string& s);

using VectorFn = std::function<std::array<double, 2>(double, double)>;

/// Exact data of one benchmark: callables for u, grad u, lambda, f, phi,
/// the exact energy and the contact geometry.
struct ExactSolution {
    BenchmarkId id;
    ScalarFn u;
    VectorFn grad_u;
    ScalarFn lambda;
    ScalarFn f;
    ScalarFn phi;
    ScalarFn dirichlet;  // boundary data on the box boundary

    double energy = 0.0;        // closed-form J(u)
    double contact_radius = 0.0; // 0 when the obstacle is inactive
    double A_const = 0.0;        // A_c or A_s (0 for Benchmark I)
    double psi = 0.0;            // Benchmark III cap angle
    bool ring_domain = false;
    bool constant_load = false;
    bool obstacle_active = true;
};

/// Root of R^2(1-2 ln R) = 1 - 4 phi/f in (0,1), by bisection.
/// Requires the active regime |f| >= 4|phi|; throws otherwise.
double contact_radius_constant(double f, double phi);

struct SphericalContact {
    double psi;
    double radius; // rho*sin(psi)
};

/// Solves the spherical-obstacle contact equation for psi in
/// (0, arcsin(1/rho)); requires |f| >= 4|phi_max| and rho >= 1.
SphericalContact contact_radius_spherical(double f, double phi_max, double rho);

/// Square domain (-1,1)^2, zero obstacle, nonzero Dirichlet data, R in [0,1).
ExactSolution benchmark1(double R);

/// Ring domain, constant obstacle phi < 0, constant loading f < 0.
ExactSolution benchmark2(double f, double phi);

/// Ring domain, spherical obstacle, phi_max < 0, rho >= 1, f < 0.
ExactSolution benchmark3(double f, double phi_max, double rho);

} // namespace obstacle
