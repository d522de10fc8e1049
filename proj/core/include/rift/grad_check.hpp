#pragma once

#include <functional>
#include <span>
#include <vector>

namespace rift::autodiff {

/// A deterministic scalar function of a flat parameter vector. When grad_out
/// is non-null the callee also writes its analytic gradient (same length as
/// the parameter vector); value-only calls may skip backward work.
using DifferentiableFn =
    std::function<double(std::span<const double> params, std::vector<double>* grad_out)>;

/// Central finite differences against the analytic gradient:
/// max over coordinates of |(f(p+eh)-f(p-eh))/(2e) - g| / max(|g|, 1e-8).
/// The estimate uses only function values, so it stays independent of the
/// differentiation path it checks. Throws NumericError if f returns NaN.
double finite_difference_check(const DifferentiableFn& f,
                               std::span<const double> params,
                               double epsilon);

}  // namespace rift::autodiff
