#pragma once

// Study-level aggregation: per-condition means/SDs, one repeated-measures
// ANOVA per metric, baseline-vs-heuristic paired t-tests and observed vs
// would-be error comparisons. p-values are uncorrected.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gazekit/block.hpp"
#include "gazekit/metrics.hpp"
#include "gazekit/stats.hpp"

namespace gazekit {

enum class Metric { Throughput, ErrorRate, LateRate, EarlyRate, SelectionTime, ErrorReduction };

inline constexpr std::array<Metric, 6> kReportMetrics = {Metric::Throughput,    Metric::ErrorRate,
                                                        Metric::LateRate,      Metric::EarlyRate,
                                                        Metric::SelectionTime, Metric::ErrorReduction};

std::string_view metric_name(Metric m) noexcept;
double metric_value(const SessionMetrics& s, Metric m) noexcept;

struct SessionSummary {
  std::string session_id;
  std::string subject_id;
  Condition condition = Condition::None;
  int block_index = 0;
  SessionMetrics metrics;
};

class UnbalancedDesignError : public std::runtime_error {
 public:
  explicit UnbalancedDesignError(std::vector<std::string> missing);
  [[nodiscard]] const std::vector<std::string>& missing() const noexcept { return missing_; }

 private:
  std::vector<std::string> missing_;
};

struct ConditionRow {
  Condition condition = Condition::None;
  Metric metric = Metric::Throughput;
  int n = 0;
  double mean = 0.0;
  std::optional<double> sd;
};

struct AnovaRow {
  Metric metric = Metric::Throughput;
  std::vector<Condition> conditions;
  std::optional<StatResult> result;
  std::string note;  // why result is absent
};

struct TTestRow {
  std::string measure;
  std::string comparison;  // "x_vs_y"
  std::optional<StatResult> result;
  double mean_x = 0.0;
  double mean_y = 0.0;
  std::string note;
};

struct CompositionRow {
  Condition condition = Condition::None;
  double error_rate_pct = 0.0;
  double late_sel_pct = 0.0;
  double early_sel_pct = 0.0;
  double other_sel_pct = 0.0;
  double late_share_pct = 0.0;
  double early_share_pct = 0.0;
  double other_share_pct = 0.0;
};

struct Report {
  std::vector<std::string> subjects;
  std::vector<Condition> conditions;
  std::vector<SessionSummary> sessions;  // input, sorted
  std::vector<ConditionRow> condition_rows;
  std::vector<AnovaRow> anova;
  std::vector<TTestRow> ttests;
  std::vector<CompositionRow> composition;
};

/// Every subject must contribute every condition present; otherwise throws
/// UnbalancedDesignError listing the missing cells. Several blocks of one
/// cell are averaged.
Report aggregate_report(std::span<const SessionSummary> sessions);

/// sessions.csv, conditions.csv, anova.csv, ttests.csv, composition.csv and
/// summary.txt.
void write_report(const Report& report, const std::filesystem::path& dir);

std::string format_summary(const Report& report);

}  // namespace gazekit
