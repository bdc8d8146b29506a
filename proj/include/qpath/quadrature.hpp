#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

namespace qpath {

struct QuadratureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
};

/// Adaptive Gauss-Kronrod integration of f over [a, b]. Interior
/// split_points (known kinks or near-singular points) partition the
/// interval before adaptation; points outside (a, b) are ignored.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol = 1e-9, double rel_tol = 1e-10,
                           const std::vector<double>& split_points = {});

/// Same, but throws QuadratureError when the error estimate fails to meet
/// the tolerance (divergent or unresolved integrand).
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-9, double rel_tol = 1e-10,
                          const std::vector<double>& split_points = {});

}  // namespace qpath
