#include "rmab/regression.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "rmab/errors.hpp"

namespace rmab {

namespace {

// Continued-fraction evaluation for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

std::string column_name(std::size_t i) {
  if (i == 0) return "intercept";
  if (i == 1) return "treatment";
  return "covariate " + std::to_string(i - 2);
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - bt * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
  if (df <= 0) throw DataError("student t: degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return regularized_incomplete_beta(0.5 * df, 0.5, x);
}

RegressionResult ols_regression(
    std::span<const double> y, std::span<const int> treatment,
    const std::vector<std::vector<double>>& covariates) {
  const std::size_t n = y.size();
  if (treatment.size() != n) {
    throw DataError("ols: treatment indicator length does not match y");
  }
  for (const auto& col : covariates) {
    if (col.size() != n) throw DataError("ols: covariate column length mismatch");
  }
  const std::size_t j_cov = covariates.size();
  const std::size_t p = j_cov + 2;
  const std::ptrdiff_t df = static_cast<std::ptrdiff_t>(n) -
                            static_cast<std::ptrdiff_t>(j_cov) - 2;
  if (df <= 0) {
    std::ostringstream os;
    os << "ols: non-positive degrees of freedom (n = " << n
       << ", covariates = " << j_cov << ")";
    throw DataError(os.str());
  }

  const auto x_at = [&](std::size_t row, std::size_t col) -> double {
    if (col == 0) return 1.0;
    if (col == 1) return static_cast<double>(treatment[row]);
    return covariates[col - 2][row];
  };

  // Normal equations; the p x p system is tiny so Gauss-Jordan with partial
  // pivoting doubles as the inverse we need for standard errors.
  std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const double xi = x_at(r, i);
      xty[i] += xi * y[r];
      for (std::size_t j = i; j < p; ++j) xtx[i][j] += xi * x_at(r, j);
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < i; ++j) xtx[i][j] = xtx[j][i];
  }

  double scale = 0.0;
  for (std::size_t i = 0; i < p; ++i) scale = std::max(scale, std::abs(xtx[i][i]));
  const double pivot_tol = scale * 1e-12;

  // Augment with the identity and reduce.
  std::vector<std::vector<double>> aug(p, std::vector<double>(2 * p, 0.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) aug[i][j] = xtx[i][j];
    aug[i][p + i] = 1.0;
  }
  std::vector<std::size_t> collinear;
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(aug[r][col]) > std::abs(aug[pivot][col])) pivot = r;
    }
    if (std::abs(aug[pivot][col]) <= pivot_tol) {
      collinear.push_back(col);
      continue;
    }
    std::swap(aug[col], aug[pivot]);
    const double inv_p = 1.0 / aug[col][col];
    for (std::size_t j = 0; j < 2 * p; ++j) aug[col][j] *= inv_p;
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double f = aug[r][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < 2 * p; ++j) aug[r][j] -= f * aug[col][j];
    }
  }
  if (!collinear.empty()) {
    std::ostringstream os;
    os << "ols: design matrix is rank deficient; collinear columns:";
    for (const std::size_t c : collinear) os << " " << column_name(c);
    throw DataError(os.str());
  }

  std::vector<double> coef(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < p; ++j) v += aug[i][p + j] * xty[j];
    coef[i] = v;
  }

  double rss = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double fitted = 0.0;
    for (std::size_t i = 0; i < p; ++i) fitted += coef[i] * x_at(r, i);
    const double e = y[r] - fitted;
    rss += e * e;
  }
  const double sigma2 = rss / static_cast<double>(df);

  RegressionResult result;
  result.intercept = coef[0];
  result.beta_hat = coef[1];
  result.gamma.assign(coef.begin() + 2, coef.end());
  result.n = n;
  result.n_covariates = j_cov;
  result.df = static_cast<int>(df);
  result.sigma2 = sigma2;
  result.se.resize(p);
  result.t_stats.resize(p);
  result.p_values.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double var = sigma2 * aug[i][p + i];
    result.se[i] = var > 0.0 ? std::sqrt(var) : 0.0;
    if (result.se[i] > 0.0) {
      result.t_stats[i] = coef[i] / result.se[i];
      result.p_values[i] = student_t_two_sided_p(result.t_stats[i],
                                                 result.df);
    } else {
      // Degenerate zero-residual fit: an exactly explained coefficient gets
      // the reported minimum p of 0, an exactly zero one is uninformative.
      result.t_stats[i] = coef[i] == 0.0
                              ? 0.0
                              : std::numeric_limits<double>::infinity() *
                                    (coef[i] > 0 ? 1.0 : -1.0);
      result.p_values[i] = coef[i] == 0.0 ? 1.0 : 0.0;
    }
  }
  return result;
}

}  // namespace rmab
