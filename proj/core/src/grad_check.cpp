#include "rift/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "rift/errors.hpp"

namespace rift::autodiff {

double finite_difference_check(const DifferentiableFn& f,
                               std::span<const double> params,
                               double epsilon) {
    if (!(epsilon > 0.0)) {
        throw PreconditionError("finite_difference_check: epsilon must be positive");
    }
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> analytic;
    double base = f(p, &analytic);
    if (std::isnan(base)) {
        throw NumericError("finite_difference_check: f returned NaN at base point");
    }
    if (analytic.size() != p.size()) {
        throw InputError("finite_difference_check: gradient length mismatch");
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double saved = p[i];
        p[i] = saved + epsilon;
        double up = f(p, nullptr);
        p[i] = saved - epsilon;
        double down = f(p, nullptr);
        p[i] = saved;
        if (std::isnan(up) || std::isnan(down)) {
            throw NumericError("finite_difference_check: f returned NaN near coordinate " +
                               std::to_string(i));
        }
        double estimate = (up - down) / (2.0 * epsilon);
        double rel = std::abs(estimate - analytic[i]) / std::max(std::abs(analytic[i]), 1e-8);
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace rift::autodiff
