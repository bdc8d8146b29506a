#include "qpath/quadrature.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qpath {

namespace {
using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
// Deeper recursion inflates the error estimate: leaves that sit at the
// noise floor each report ~eps-level defects and those sum over an
// exponentially growing leaf count. Depth 15 resolves every integrand in
// this library; genuinely divergent integrands still fail the tolerance.
constexpr unsigned kMaxDepth = 15;
}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol,
                           const std::vector<double>& split_points) {
    double sign = 1.0;
    if (a == b) return {0.0, 0.0, true};
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> knots{a, b};
    for (double s : split_points)
        if (s > a && s < b) knots.push_back(s);
    std::sort(knots.begin(), knots.end());
    // Merge knots that nearly coincide; sliver intervals only feed the
    // noise-accumulation problem described above.
    const double merge_width = 1e-6 * (b - a);
    for (auto it = knots.begin() + 1; it + 1 < knots.end();) {
        if (*it - *(it - 1) < merge_width || *(it + 1) - *it < merge_width)
            it = knots.erase(it);
        else
            ++it;
    }

    QuadratureResult out;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        // One rule application sizes the piece so the requested absolute
        // tolerance can be translated into boost's relative one.
        double rough_err = 0.0;
        const double rough = GK::integrate(f, knots[i], knots[i + 1], 0, 0.1, &rough_err);
        const double scale = std::max(std::abs(rough), abs_tol);
        const double tol_i =
            std::clamp(std::max(rel_tol, 0.1 * abs_tol / scale), 1e-10, 0.1);
        double err = 0.0;
        out.value += GK::integrate(f, knots[i], knots[i + 1], kMaxDepth, tol_i, &err);
        out.error += err;
    }
    out.value *= sign;
    out.converged = std::isfinite(out.value) &&
                    out.error <= std::max(abs_tol, rel_tol * std::abs(out.value)) * 10.0;
    return out;
}

double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol,
                          const std::vector<double>& split_points) {
    const QuadratureResult r = integrate(f, a, b, abs_tol, rel_tol, split_points);
    if (!r.converged)
        throw QuadratureError("quadrature did not converge (error estimate " +
                              std::to_string(r.error) + "); integrand may be singular");
    return r.value;
}

}  // namespace qpath
