#pragma once

#include <string_view>
#include <vector>

#include "stosqp/problem.hpp"

namespace stosqp {

/// Built-in test problems with hand-derived KKT points (all have d <= 10 and r >= 1).
///
///   p1_bound     min x^2                          s.t. 1 - x <= 0
///   p2_simplex   min (x1-1)^2 + (x2-2)^2          s.t. x1 + x2 = 2, x >= 0
///   p3_circle    min .5||x - (2,2)||^2            s.t. x1^2 + x2^2 <= 2
///   p4_inactive  min .5(x1-1)^2 + .5(x2-.5)^2 + .05(x1-1)^4  s.t. x1^2 + x2^2 <= 4
///   p5_mixed     3 variables, one nonlinear equality, two inequalities (one active)
///   p6_box5      5-d convex quadratic with 0 <= x <= 1
///
/// Problems p3..p6 have objective curvature near 1, the scale of the identity
/// Hessian approximation used by default.
std::vector<ProblemDef> builtin_suite();

/// Looks a suite problem up by name; throws std::invalid_argument when unknown.
ProblemDef find_problem(std::string_view name);

std::vector<std::string> builtin_problem_names();

}  // namespace stosqp
