#include "gazekit/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

namespace gazekit {

namespace fs = std::filesystem;

std::string_view metric_name(Metric m) noexcept {
  switch (m) {
    case Metric::Throughput:
      return "throughput_bps";
    case Metric::ErrorRate:
      return "error_rate_pct";
    case Metric::LateRate:
      return "late_rate_pct";
    case Metric::EarlyRate:
      return "early_rate_pct";
    case Metric::SelectionTime:
      return "mean_selection_time_ms";
    case Metric::ErrorReduction:
      break;
  }
  return "error_reduction";
}

double metric_value(const SessionMetrics& s, Metric m) noexcept {
  switch (m) {
    case Metric::Throughput:
      return s.throughput_bps;
    case Metric::ErrorRate:
      return s.error_rate_pct;
    case Metric::LateRate:
      return s.late_rate_pct;
    case Metric::EarlyRate:
      return s.early_rate_pct;
    case Metric::SelectionTime:
      return s.mean_selection_time_ms;
    case Metric::ErrorReduction:
      break;
  }
  return s.error_reduction;
}

UnbalancedDesignError::UnbalancedDesignError(std::vector<std::string> missing)
    : std::runtime_error([&] {
        std::string msg = "unbalanced design, missing cells:";
        for (const auto& m : missing) msg += " " + m;
        return msg;
      }()),
      missing_(std::move(missing)) {}

namespace {

// Cell-averaged metric values: subject -> condition -> metrics.
using CellMap = std::map<std::string, std::map<Condition, SessionMetrics>>;

SessionMetrics average(const std::vector<const SessionMetrics*>& blocks) {
  if (blocks.size() == 1) return *blocks.front();
  SessionMetrics m;
  const double n = static_cast<double>(blocks.size());
  for (const SessionMetrics* b : blocks) {
    m.throughput_bps += b->throughput_bps / n;
    m.error_rate_pct += b->error_rate_pct / n;
    m.late_rate_pct += b->late_rate_pct / n;
    m.early_rate_pct += b->early_rate_pct / n;
    m.other_rate_pct += b->other_rate_pct / n;
    m.late_sel_pct += b->late_sel_pct / n;
    m.early_sel_pct += b->early_sel_pct / n;
    m.other_sel_pct += b->other_sel_pct / n;
    m.mean_selection_time_ms += b->mean_selection_time_ms / n;
    m.selections += b->selections;
    m.errors_observed += b->errors_observed;
    m.errors_would_be += b->errors_would_be;
    m.throughput_trials += b->throughput_trials;
    m.throughput_excluded += b->throughput_excluded;
  }
  // counts are summed over blocks, reduction stays consistent with them
  m.error_reduction = m.errors_would_be - m.errors_observed;
  return m;
}

std::vector<double> column(const Report& r, const CellMap& cells, Condition c, double (*get)(const SessionMetrics&)) {
  std::vector<double> out;
  out.reserve(r.subjects.size());
  for (const auto& s : r.subjects) out.push_back(get(cells.at(s).at(c)));
  return out;
}

std::string num(double v) { return fmt::format("{}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

Report aggregate_report(std::span<const SessionSummary> sessions) {
  if (sessions.empty()) throw EmptyMetricError("no sessions to report");
  Report r;
  r.sessions.assign(sessions.begin(), sessions.end());
  std::sort(r.sessions.begin(), r.sessions.end(), [](const SessionSummary& a, const SessionSummary& b) {
    return std::tie(a.subject_id, a.condition, a.block_index, a.session_id) <
           std::tie(b.subject_id, b.condition, b.block_index, b.session_id);
  });

  std::set<std::string> subjects;
  std::set<Condition> conditions;
  std::map<std::string, std::map<Condition, std::vector<const SessionMetrics*>>> raw;
  for (const SessionSummary& s : r.sessions) {
    subjects.insert(s.subject_id);
    conditions.insert(s.condition);
    raw[s.subject_id][s.condition].push_back(&s.metrics);
  }
  r.subjects.assign(subjects.begin(), subjects.end());
  r.conditions.assign(conditions.begin(), conditions.end());

  std::vector<std::string> missing;
  for (const auto& s : r.subjects) {
    for (Condition c : r.conditions) {
      if (!raw[s].contains(c)) missing.push_back(s + "/" + std::string(to_string(c)));
    }
  }
  if (!missing.empty()) throw UnbalancedDesignError(std::move(missing));

  CellMap cells;
  for (const auto& [s, by_cond] : raw) {
    for (const auto& [c, blocks] : by_cond) cells[s][c] = average(blocks);
  }

  auto subject_values = [&](Condition c, Metric m) {
    std::vector<double> v;
    for (const auto& s : r.subjects) v.push_back(metric_value(cells[s][c], m));
    return v;
  };

  for (Condition c : r.conditions) {
    for (Metric m : kReportMetrics) {
      const std::vector<double> v = subject_values(c, m);
      ConditionRow row{c, m, static_cast<int>(v.size()), mean(v), std::nullopt};
      if (v.size() >= 2) row.sd = sample_sd(v);
      r.condition_rows.push_back(row);
    }
  }

  for (Metric m : kReportMetrics) {
    AnovaRow row;
    row.metric = m;
    for (Condition c : r.conditions) {
      if (m == Metric::ErrorReduction && c == Condition::None) continue;
      row.conditions.push_back(c);
    }
    if (row.conditions.size() < 2) {
      row.note = "needs at least two conditions";
    } else if (r.subjects.size() < 2) {
      row.note = "needs at least two subjects";
    } else {
      std::vector<std::vector<double>> matrix;
      for (const auto& s : r.subjects) {
        std::vector<double> rowv;
        for (Condition c : row.conditions) rowv.push_back(metric_value(cells[s][c], m));
        matrix.push_back(std::move(rowv));
      }
      try {
        row.result = rm_anova(matrix);
      } catch (const DegenerateInputError& e) {
        row.note = std::string("degenerate: ") + e.what();
      }
    }
    r.anova.push_back(std::move(row));
  }

  auto run_t = [&](std::string measure, std::string comparison, const std::vector<double>& x,
                   const std::vector<double>& y) {
    TTestRow row{std::move(measure), std::move(comparison), std::nullopt, mean(x), mean(y), {}};
    try {
      row.result = paired_t(x, y);
    } catch (const DegenerateInputError& e) {
      row.note = std::string("degenerate: ") + e.what();
    }
    r.ttests.push_back(std::move(row));
  };

  if (conditions.contains(Condition::None)) {
    for (Metric m : kReportMetrics) {
      if (m == Metric::ErrorReduction) continue;
      for (Condition c : r.conditions) {
        if (c == Condition::None) continue;
        run_t(std::string(metric_name(m)), fmt::format("none_vs_{}", to_string(c)), subject_values(Condition::None, m),
              subject_values(c, m));
      }
    }
  }
  for (Condition c : r.conditions) {
    if (c == Condition::None) continue;
    run_t("errors", fmt::format("{}_observed_vs_would_be", to_string(c)),
          column(r, cells, c, [](const SessionMetrics& s) { return static_cast<double>(s.errors_observed); }),
          column(r, cells, c, [](const SessionMetrics& s) { return static_cast<double>(s.errors_would_be); }));
  }

  for (Condition c : r.conditions) {
    CompositionRow row{c};
    const double n = static_cast<double>(r.subjects.size());
    for (const auto& s : r.subjects) {
      const SessionMetrics& m = cells[s][c];
      row.error_rate_pct += m.error_rate_pct / n;
      row.late_sel_pct += m.late_sel_pct / n;
      row.early_sel_pct += m.early_sel_pct / n;
      row.other_sel_pct += m.other_sel_pct / n;
      row.late_share_pct += m.late_rate_pct / n;
      row.early_share_pct += m.early_rate_pct / n;
      row.other_share_pct += m.other_rate_pct / n;
    }
    r.composition.push_back(row);
  }
  return r;
}

std::string format_summary(const Report& r) {
  std::string out;
  out += fmt::format("subjects: {}  conditions:", r.subjects.size());
  for (Condition c : r.conditions) out += fmt::format(" {}", to_string(c));
  out += fmt::format("  sessions: {}\n\n", r.sessions.size());

  out += "per-condition means (SD)\n";
  for (const ConditionRow& row : r.condition_rows) {
    out += fmt::format("  {:<16} {:<24} {:>12.4f}", to_string(row.condition), metric_name(row.metric), row.mean);
    out += row.sd ? fmt::format(" ({:.4f})\n", *row.sd) : std::string("\n");
  }

  out += "\nrepeated-measures ANOVA\n";
  for (const AnovaRow& row : r.anova) {
    if (row.result) {
      out += fmt::format("  {:<24} F({:g}, {:g}) = {:.3f}, p = {:.4f}, eta2G = {:.3f}\n", metric_name(row.metric),
                         row.result->df1, *row.result->df2, row.result->statistic, row.result->p_value,
                         row.result->effect);
    } else {
      out += fmt::format("  {:<24} n/a ({})\n", metric_name(row.metric), row.note);
    }
  }

  out += "\npaired t-tests (uncorrected)\n";
  for (const TTestRow& row : r.ttests) {
    if (row.result) {
      out += fmt::format("  {:<24} {:<36} t({:g}) = {:.3f}, p = {:.4f}, Mdiff = {:.3f}\n", row.measure, row.comparison,
                         row.result->df1, row.result->statistic, row.result->p_value, row.result->effect);
    } else {
      out += fmt::format("  {:<24} {:<36} n/a ({})\n", row.measure, row.comparison, row.note);
    }
  }

  out += "\nerror composition (mean % of selections; share of errors)\n";
  for (const CompositionRow& row : r.composition) {
    out += fmt::format("  {:<16} error {:6.2f}%  late {:6.2f}  early {:6.2f}  other {:6.2f}  |  {:6.2f}/{:6.2f}/{:6.2f}\n",
                       to_string(row.condition), row.error_rate_pct, row.late_sel_pct, row.early_sel_pct,
                       row.other_sel_pct, row.late_share_pct, row.early_share_pct, row.other_share_pct);
  }
  return out;
}

void write_report(const Report& r, const fs::path& dir) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
  };

  {
    auto out = open("sessions.csv");
    out << "session_id,subject_id,condition,block_index,throughput_bps,error_rate_pct,late_rate_pct,early_rate_pct,"
           "other_rate_pct,late_sel_pct,early_sel_pct,other_sel_pct,mean_selection_time_ms,selections,errors_observed,"
           "errors_would_be,error_reduction,throughput_trials,throughput_excluded\n";
    for (const SessionSummary& s : r.sessions) {
      const SessionMetrics& m = s.metrics;
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", s.session_id, s.subject_id,
                         to_string(s.condition), s.block_index, num(m.throughput_bps), num(m.error_rate_pct),
                         num(m.late_rate_pct), num(m.early_rate_pct), num(m.other_rate_pct), num(m.late_sel_pct),
                         num(m.early_sel_pct), num(m.other_sel_pct), num(m.mean_selection_time_ms), m.selections,
                         m.errors_observed, m.errors_would_be, m.error_reduction, m.throughput_trials,
                         m.throughput_excluded);
    }
  }
  {
    auto out = open("conditions.csv");
    out << "condition,metric,n,mean,sd\n";
    for (const ConditionRow& row : r.condition_rows) {
      out << fmt::format("{},{},{},{},{}\n", to_string(row.condition), metric_name(row.metric), row.n, num(row.mean),
                         num(row.sd));
    }
  }
  {
    auto out = open("anova.csv");
    out << "metric,conditions,F,df1,df2,p,eta2g,note\n";
    for (const AnovaRow& row : r.anova) {
      std::string conds;
      for (Condition c : row.conditions) conds += (conds.empty() ? "" : ";") + std::string(to_string(c));
      if (row.result) {
        out << fmt::format("{},{},{},{},{},{},{},\n", metric_name(row.metric), conds, num(row.result->statistic),
                           num(row.result->df1), num(row.result->df2), num(row.result->p_value),
                           num(row.result->effect));
      } else {
        out << fmt::format("{},{},,,,,,{}\n", metric_name(row.metric), conds, row.note);
      }
    }
  }
  {
    auto out = open("ttests.csv");
    out << "measure,comparison,mean_x,mean_y,t,df,p,mean_diff,note\n";
    for (const TTestRow& row : r.ttests) {
      if (row.result) {
        out << fmt::format("{},{},{},{},{},{},{},{},\n", row.measure, row.comparison, num(row.mean_x), num(row.mean_y),
                           num(row.result->statistic), num(row.result->df1), num(row.result->p_value),
                           num(row.result->effect));
      } else {
        out << fmt::format("{},{},{},{},,,,,{}\n", row.measure, row.comparison, num(row.mean_x), num(row.mean_y),
                           row.note);
      }
    }
  }
  {
    auto out = open("composition.csv");
    out << "condition,error_rate_pct,late_sel_pct,early_sel_pct,other_sel_pct,late_share_pct,early_share_pct,"
           "other_share_pct\n";
    for (const CompositionRow& row : r.composition) {
      out << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(row.condition), num(row.error_rate_pct),
                         num(row.late_sel_pct), num(row.early_sel_pct), num(row.other_sel_pct),
                         num(row.late_share_pct), num(row.early_share_pct), num(row.other_share_pct));
    }
  }
  {
    auto out = open("summary.txt");
    out << format_summary(r);
  }
}

}  // namespace gazekit
