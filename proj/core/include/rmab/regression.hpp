#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rmab {

// Ordinary least squares fit of
//   Y_i = k + beta * T_i + sum_j gamma_j x_ij + eps_i
// with coefficient standard errors from the unbiased residual variance and
// two-sided p-values from the exact t-distribution with n - J - 2 degrees
// of freedom. Coefficient order everywhere: [intercept, treatment,
// covariates...].
struct RegressionResult {
  double intercept = 0.0;
  double beta_hat = 0.0;             // treatment effect
  std::vector<double> gamma;         // covariate coefficients
  std::vector<double> se;            // per coefficient
  std::vector<double> t_stats;       // per coefficient
  std::vector<double> p_values;      // per coefficient, two-sided
  std::size_t n = 0;                 // sample size
  std::size_t n_covariates = 0;      // J
  int df = 0;                        // n - J - 2
  double sigma2 = 0.0;               // residual variance estimate
};

// covariates[j] is the j-th covariate column of length n (may be empty).
// Throws DataError on rank deficiency (reporting the collinear columns)
// or non-positive degrees of freedom. Zero-residual fits produce zero
// standard errors and p-values at the reported minimum of 0.
RegressionResult ols_regression(std::span<const double> y,
                                std::span<const int> treatment,
                                const std::vector<std::vector<double>>& covariates);

// Regularized incomplete beta function I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided p-value of a t statistic with df degrees of freedom.
double student_t_two_sided_p(double t, int df);

}  // namespace rmab
