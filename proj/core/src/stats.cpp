#include "gazekit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gazekit {

namespace {

// Continued fraction for I_x(a, b); converges for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("t distribution needs df > 0");
  if (std::isinf(t)) return 0.0;
  return incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
}

double f_upper_p(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw std::invalid_argument("F distribution needs positive dfs");
  if (f <= 0.0) return 1.0;
  return incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

double mean(std::span<const double> v) {
  if (v.empty()) throw DegenerateInputError("mean of an empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) throw DegenerateInputError("sd needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

StatResult paired_t(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("paired samples differ in length");
  if (x.size() < 2) throw DegenerateInputError("paired t-test needs at least two pairs");
  std::vector<double> d(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DegenerateInputError("non-finite paired value");
    d[i] = x[i] - y[i];
  }
  const double md = mean(d);
  const double sd = sample_sd(d);
  double scale = 0.0;
  for (double v : d) scale = std::max(scale, std::abs(v));
  // differences equal up to rounding count as constant
  if (!(sd > 1e-13 * scale)) throw DegenerateInputError("paired differences have zero variance");
  const double n = static_cast<double>(d.size());
  StatResult r;
  r.statistic = md / (sd / std::sqrt(n));
  r.df1 = n - 1.0;
  r.p_value = t_two_sided_p(r.statistic, r.df1);
  r.effect = md;
  return r;
}

AnovaDecomposition rm_anova_decompose(const std::vector<std::vector<double>>& values) {
  if (values.size() < 2) throw DegenerateInputError("repeated-measures ANOVA needs at least two subjects");
  const std::size_t k = values.front().size();
  if (k < 2) throw DegenerateInputError("repeated-measures ANOVA needs at least two conditions");
  for (std::size_t s = 0; s < values.size(); ++s) {
    if (values[s].size() != k) {
      throw MissingCellError("subject row " + std::to_string(s) + " has " + std::to_string(values[s].size()) +
                             " cells, expected " + std::to_string(k));
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (!std::isfinite(values[s][c])) {
        throw MissingCellError("missing cell (subject " + std::to_string(s) + ", condition " + std::to_string(c) +
                               ")");
      }
    }
  }

  const double n = static_cast<double>(values.size());
  const double kk = static_cast<double>(k);
  double grand = 0.0;
  for (const auto& row : values) grand += std::accumulate(row.begin(), row.end(), 0.0);
  grand /= n * kk;

  AnovaDecomposition a;
  std::vector<double> cond_mean(k, 0.0);
  for (const auto& row : values) {
    double subj = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      subj += row[c];
      cond_mean[c] += row[c] / n;
      a.ss_total += (row[c] - grand) * (row[c] - grand);
    }
    subj /= kk;
    a.ss_subject += kk * (subj - grand) * (subj - grand);
  }
  for (double m : cond_mean) a.ss_condition += n * (m - grand) * (m - grand);
  // residual computed cell-wise to avoid cancellation in SS_total - SS_subject - SS_condition
  for (const auto& row : values) {
    const double subj = std::accumulate(row.begin(), row.end(), 0.0) / kk;
    for (std::size_t c = 0; c < k; ++c) {
      const double r = row[c] - subj - cond_mean[c] + grand;
      a.ss_error += r * r;
    }
  }
  return a;
}

StatResult rm_anova(const std::vector<std::vector<double>>& values) {
  const AnovaDecomposition a = rm_anova_decompose(values);
  const double n = static_cast<double>(values.size());
  const double k = static_cast<double>(values.front().size());
  StatResult r;
  r.df1 = k - 1.0;
  r.df2 = (k - 1.0) * (n - 1.0);

  const double scale = a.ss_total > 0.0 ? a.ss_total : 1.0;
  if (a.ss_condition <= 1e-14 * scale) {
    r.statistic = 0.0;
    r.p_value = 1.0;
    r.effect = 0.0;
    return r;
  }
  if (!(a.ss_error > 1e-14 * scale)) throw DegenerateInputError("zero error variance with a nonzero condition effect");
  const double ms_condition = a.ss_condition / r.df1;
  const double ms_error = a.ss_error / *r.df2;
  r.statistic = ms_condition / ms_error;
  r.p_value = f_upper_p(r.statistic, r.df1, *r.df2);
  r.effect = a.ss_condition / (a.ss_condition + a.ss_subject + a.ss_error);
  return r;
}

}  // namespace gazekit
