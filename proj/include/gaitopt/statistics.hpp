#pragma once

// Distribution functions needed by the regression t-tests.

namespace gaitopt::stats {

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double incomplete_beta(double a, double b, double x);

// Student t cumulative distribution with `dof` degrees of freedom.
double student_t_cdf(double t, double dof);

// P(|T| >= |t|) for T ~ t(dof).
double two_sided_p_value(double t, double dof);

} // namespace gaitopt::stats
