#include "obstacle/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace obstacle {

namespace {

constexpr double kPi = std::numbers::pi;

/// Bisection on [lo, hi]; g must change sign. Stops when the bracket is
/// below 1e-14 or collapses to adjacent floats.
double bisect(const std::function<double(double)>& g, double lo, double hi) {
    double glo = g(lo);
    double ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if ((glo > 0.0) == (ghi > 0.0))
        throw std::runtime_error("bisection: no sign change on the bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (gm == 0.0) return mid;
        if ((gm > 0.0) == (glo > 0.0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Energy of u(r) = f/4 (1-r^2) + A ln r over the annulus R < r < 1 plus
/// the loading term is assembled by the callers; this is the shared annulus
/// part pi f^2 (1-R^2)(3R^2-1)/16 - pi A^2 ln R + pi A f R^2 ln R.
double annulus_energy(double f, double A, double R) {
    const double lnR = std::log(R);
    return kPi * f * f * (1 - R * R) * (3 * R * R - 1) / 16.0 - kPi * A * A * lnR +
           kPi * A * f * R * R * lnR;
}

} // namespace

std::string to_string(BenchmarkId id) {
    switch (id) {
        case BenchmarkId::I: return "I";
        case BenchmarkId::II: return "II";
        case BenchmarkId::III: return "III";
    }
    return "?";
}

BenchmarkId benchmark_from_string(const std::string& s) {
    if (s == "I" || s == "1") return BenchmarkId::I;
    if (s == "II" || s == "2") return BenchmarkId::II;
    if (s == "III" || s == "3") return BenchmarkId::III;
    throw std::invalid_argument("unknown benchmark id: " + s);
}

double contact_radius_constant(double f, double phi) {
    if (!(f < 0.0) || !(phi < 0.0))
        throw std::invalid_argument("contact_radius_constant: f and phi must be negative");
    if (std::abs(f) < 4.0 * std::abs(phi))
        throw std::runtime_error("contact_radius_constant: obstacle inactive; use the linear solution");
    const double rhs = 1.0 - 4.0 * phi / f; // in [0,1)
    if (rhs <= 0.0) return 1e-9;            // threshold |f| = 4|phi|: R -> 0+
    auto g = [&](double R) { return R * R * (1.0 - 2.0 * std::log(R)) - rhs; };
    const double lo = 1e-9, hi = 1.0 - 1e-9;
    if (g(lo) >= 0.0) return lo;
    return bisect(g, lo, hi);
}

SphericalContact contact_radius_spherical(double f, double phi_max, double rho) {
    if (!(f < 0.0) || !(phi_max < 0.0))
        throw std::invalid_argument("contact_radius_spherical: f and phi_max must be negative");
    if (rho < 1.0)
        throw std::invalid_argument("contact_radius_spherical: rho must be >= 1");
    if (std::abs(f) < 4.0 * std::abs(phi_max))
        throw std::runtime_error("contact_radius_spherical: obstacle inactive; use the linear solution");
    auto g = [&](double psi) {
        const double R = rho * std::sin(psi);
        const double num = 4.0 * (phi_max - rho + rho * std::cos(psi)) + f * R * R - f;
        return num / (4.0 * R * std::log(R)) - f * R / 2.0 + std::tan(psi);
    };
    const double lo = 1e-9;
    const double hi = std::asin(1.0 / rho) - 1e-9;
    const double psi = bisect(g, lo, hi);
    return {psi, rho * std::sin(psi)};
}

ExactSolution benchmark1(double R) {
    if (R < 0.0 || R >= 1.0)
        throw std::invalid_argument("benchmark1: R must lie in [0,1)");
    ExactSolution s;
    s.id = BenchmarkId::I;
    s.ring_domain = false;
    s.constant_load = false;
    s.contact_radius = R;
    s.obstacle_active = R > 0.0;
    const double R2 = R * R, R4 = R2 * R2;

    s.u = [R2](double x, double y) {
        const double t = std::max(x * x + y * y - R2, 0.0);
        return t * t;
    };
    s.dirichlet = [R2](double x, double y) {
        const double t = x * x + y * y - R2;
        return t * t;
    };
    s.grad_u = [R2](double x, double y) -> std::array<double, 2> {
        const double t = x * x + y * y - R2;
        if (t <= 0.0) return {0.0, 0.0};
        return {4.0 * t * x, 4.0 * t * y};
    };
    s.f = [R2, R4](double x, double y) {
        const double r2 = x * x + y * y;
        if (r2 > R2) return -16.0 * r2 + 8.0 * R2;
        return -8.0 * (R4 + R2) + 8.0 * R2 * r2;
    };
    s.lambda = [R2, R4](double x, double y) {
        const double r2 = x * x + y * y;
        if (r2 > R2) return 0.0;
        return 8.0 * (R4 + R2) - 8.0 * R2 * r2;
    };
    s.phi = [](double, double) { return 0.0; };
    s.energy = 192.0 * (12.0 / 35.0 - 28.0 * R2 / 45.0 + R4 / 3.0) -
               32.0 * R2 * (28.0 / 45.0 - 4.0 * R2 / 3.0 + R4) +
               2.0 / 3.0 * kPi * R4 * R4;
    return s;
}

ExactSolution benchmark2(double f, double phi) {
    if (!(f < 0.0) || !(phi < 0.0))
        throw std::invalid_argument("benchmark2: f and phi must be negative");
    ExactSolution s;
    s.id = BenchmarkId::II;
    s.ring_domain = true;
    s.constant_load = true;
    s.f = [f](double, double) { return f; };
    s.phi = [phi](double, double) { return phi; };
    s.dirichlet = [](double, double) { return 0.0; };

    if (std::abs(f) < 4.0 * std::abs(phi)) {
        s.obstacle_active = false;
        s.contact_radius = 0.0;
        s.u = [f](double x, double y) { return f / 4.0 * (1.0 - x * x - y * y); };
        s.grad_u = [f](double x, double y) -> std::array<double, 2> {
            return {-f * x / 2.0, -f * y / 2.0};
        };
        s.lambda = [](double, double) { return 0.0; };
        s.energy = -kPi * f * f / 16.0;
        return s;
    }

    const double R = contact_radius_constant(f, phi);
    const double A = (4.0 * phi + f * R * R - f) / (4.0 * std::log(R));
    s.obstacle_active = true;
    s.contact_radius = R;
    s.A_const = A;
    s.u = [f, phi, R, A](double x, double y) {
        const double r = std::hypot(x, y);
        if (r <= R) return phi;
        return f / 4.0 * (1.0 - r * r) + A * std::log(r);
    };
    s.grad_u = [f, R, A](double x, double y) -> std::array<double, 2> {
        const double r2 = x * x + y * y;
        if (r2 <= R * R) return {0.0, 0.0};
        return {A * x / r2 - f * x / 2.0, A * y / r2 - f * y / 2.0};
    };
    s.lambda = [f, R](double x, double y) {
        return (std::hypot(x, y) <= R) ? -f : 0.0;
    };
    s.energy = annulus_energy(f, A, R) - kPi * f * phi * R * R;
    return s;
}

ExactSolution benchmark3(double f, double phi_max, double rho) {
    const auto contact = contact_radius_spherical(f, phi_max, rho);
    const double psi = contact.psi, R = contact.radius;
    const double lnR = std::log(R);
    const double A = (4.0 * (phi_max - rho + rho * std::cos(psi)) + f * R * R - f) / (4.0 * lnR);

    ExactSolution s;
    s.id = BenchmarkId::III;
    s.ring_domain = true;
    s.constant_load = true;
    s.obstacle_active = true;
    s.contact_radius = R;
    s.A_const = A;
    s.psi = psi;
    s.f = [f](double, double) { return f; };
    // the sphere formula is clamped beyond r = rho, where circumscribed-mesh
    // vertices of coarse meshes can land
    s.phi = [phi_max, rho](double x, double y) {
        const double t = rho * rho - x * x - y * y;
        return phi_max - rho + std::sqrt(std::max(t, 0.0));
    };
    s.dirichlet = [](double, double) { return 0.0; };
    s.u = [f, phi_max, rho, R, A](double x, double y) {
        const double r = std::hypot(x, y);
        if (r <= R) return phi_max - rho + std::sqrt(std::max(rho * rho - r * r, 0.0));
        return f / 4.0 * (1.0 - r * r) + A * std::log(r);
    };
    s.grad_u = [f, rho, R, A](double x, double y) -> std::array<double, 2> {
        const double r2 = x * x + y * y;
        if (r2 <= R * R) {
            const double den = std::sqrt(rho * rho - r2);
            return {-x / den, -y / den};
        }
        return {A * x / r2 - f * x / 2.0, A * y / r2 - f * y / 2.0};
    };
    s.lambda = [f, rho, R](double x, double y) {
        const double r2 = x * x + y * y;
        if (r2 > R * R) return 0.0;
        const double t = rho * rho - r2;
        return (2.0 * rho * rho - r2) / (t * std::sqrt(t)) - f;
    };

    const double s2 = std::sin(psi) * std::sin(psi);
    const double c = std::cos(psi);
    const double j1 = -kPi * rho * rho / 2.0 * (s2 + std::log(c * c)) -
                      kPi * f * rho * rho * (phi_max - rho) * s2 -
                      2.0 * kPi * f * rho * rho * rho / 3.0 * (1.0 - c * c * c);
    const double j2 = annulus_energy(f, A, R);
    s.energy = j1 + j2;
    return s;
}

} // namespace obstacle
