#pragma once

#include <cstddef>
#include <vector>

namespace obstacle {

/// Coefficients of a bilinear nodal function, one value per mesh node.
struct NodalField {
    std::vector<double> values;

    NodalField() = default;
    explicit NodalField(std::size_t n, double fill = 0.0) : values(n, fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Normal-flux coefficients of a lowest-order Raviart-Thomas field, one per
/// mesh edge. Entries on edges not touching an active element stay zero.
struct EdgeFluxField {
    std::vector<double> values;

    EdgeFluxField() = default;
    explicit EdgeFluxField(std::size_t n, double fill = 0.0) : values(n, fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

/// A piecewise-constant function, one value per mesh element. Entries on
/// inactive elements are kept at zero and ignored by every operation.
struct ElementField {
    std::vector<double> values;

    ElementField() = default;
    explicit ElementField(std::size_t n, double fill = 0.0) : values(n, fill) {}

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
};

} // namespace obstacle
