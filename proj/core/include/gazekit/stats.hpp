#pragma once

// Paired t-tests and one-way repeated-measures ANOVA with generalized eta
// squared. Degenerate inputs throw; nothing returns NaN.

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gazekit {

class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StatResult {
  double statistic = 0.0;  // t or F
  double df1 = 0.0;
  std::optional<double> df2;  // F only
  double p_value = 1.0;
  double effect = 0.0;  // mean difference (t) or generalized eta squared (F)
};

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

/// Upper-tail p-value P(F > f) of the F distribution.
double f_upper_p(double f, double df1, double df2);

/// d = x - y; t = mean(d) / (sd(d) / sqrt(n)), df = n - 1.
StatResult paired_t(std::span<const double> x, std::span<const double> y);

struct AnovaDecomposition {
  double ss_condition = 0.0;
  double ss_subject = 0.0;
  double ss_error = 0.0;
  double ss_total = 0.0;
};

/// Sums of squares for a subjects x conditions matrix.
AnovaDecomposition rm_anova_decompose(const std::vector<std::vector<double>>& values);

/// One-way within-subjects ANOVA; rows are subjects, columns conditions.
/// Ragged rows or non-finite cells throw MissingCellError.
StatResult rm_anova(const std::vector<std::vector<double>>& values);

double mean(std::span<const double> v);
/// Sample standard deviation (n - 1).
double sample_sd(std::span<const double> v);

}  // namespace gazekit
