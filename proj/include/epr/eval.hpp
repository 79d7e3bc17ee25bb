#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "epr/descriptor_set.hpp"
#include "epr/errors.hpp"
#include "epr/sparse_matrix.hpp"

namespace epr {

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
};

// Operating points in threshold order (recall non-decreasing). The AUC is
// the trapezoidal integral anchored at an implicit (0, first precision)
// point; no interpolation toward (0, 1) is applied.
struct PrCurve {
  std::vector<PrPoint> points;
  double auc = 0.0;
};

namespace detail {

inline double anchored_trapezoid(const std::vector<PrPoint>& points) {
  if (points.empty()) return 0.0;
  double auc = 0.0;
  double prev_recall = 0.0;
  double prev_precision = points.front().precision;
  for (const PrPoint& point : points) {
    auc += (point.recall - prev_recall) * 0.5 * (point.precision + prev_precision);
    prev_recall = point.recall;
    prev_precision = point.precision;
  }
  return auc;
}

struct LabeledValue {
  double value = 0.0;
  bool soft = false;
  bool hard = false;
};

inline void sort_descending(std::vector<LabeledValue>& values) {
  std::sort(values.begin(), values.end(),
            [](const LabeledValue& a, const LabeledValue& b) { return a.value > b.value; });
}

}  // namespace detail

// Best evaluated pair per query; one retained pair is a true positive when
// it lies in soft GT. Queries without any hard match stay out of the recall
// denominator: a soft best pair there is neutral, anything else a false
// positive. Thresholds sweep the distinct best-pair similarities descending.
inline PrCurve single_matching_curve(const SparseSimilarityMatrix& matrix,
                                     const GroundTruth& gt) {
  std::vector<char> query_has_hard(static_cast<std::size_t>(matrix.q_count), 0);
  for (const auto& [db_index, q_index] : gt.hard) {
    query_has_hard[static_cast<std::size_t>(q_index)] = 1;
  }
  const int relevant =
      static_cast<int>(std::count(query_has_hard.begin(), query_has_hard.end(), 1));
  if (relevant == 0) throw domain_error("no query has a hard match; recall undefined");
  if (matrix.entry_count() == 0) throw domain_error("matrix has no evaluated entries");

  // neutral pairs (soft best on a no-hard query) are dropped up front: they
  // can alter neither counts nor the threshold set's emitted points.
  std::vector<detail::LabeledValue> best_pairs;
  for (int t = 0; t < matrix.q_count; ++t) {
    const SparseColumn& column = matrix.columns[static_cast<std::size_t>(t)];
    if (column.empty()) continue;
    const SparseColumnEntry* best = &column.front();
    for (const SparseColumnEntry& entry : column) {
      if (entry.value > best->value) best = &entry;
    }
    const bool in_soft = gt.is_soft(best->index, t);
    if (query_has_hard[static_cast<std::size_t>(t)] != 0) {
      best_pairs.push_back({best->value, in_soft, true});
    } else if (!in_soft) {
      best_pairs.push_back({best->value, false, false});
    }
  }

  detail::sort_descending(best_pairs);
  PrCurve curve;
  int tp = 0;
  int fp = 0;
  for (std::size_t j = 0; j < best_pairs.size();) {
    const double threshold = best_pairs[j].value;
    for (; j < best_pairs.size() && best_pairs[j].value == threshold; ++j) {
      if (best_pairs[j].soft) {
        ++tp;
      } else {
        ++fp;
      }
    }
    curve.points.push_back({static_cast<double>(tp) / relevant,
                            static_cast<double>(tp) / static_cast<double>(tp + fp)});
  }
  curve.auc = detail::anchored_trapezoid(curve.points);
  return curve;
}

// All evaluated entries are the retrieval set. Precision counts soft hits
// over retrieved, recall counts hard hits over |hard|: a hard pair the run
// never evaluated is a permanent false negative, while soft-only pairs
// cannot inflate recall.
inline PrCurve multi_matching_curve(const SparseSimilarityMatrix& matrix,
                                    const GroundTruth& gt) {
  if (gt.hard.empty()) throw domain_error("hard ground truth is empty; recall undefined");
  if (matrix.entry_count() == 0) throw domain_error("matrix has no evaluated entries");

  std::vector<detail::LabeledValue> entries;
  entries.reserve(static_cast<std::size_t>(matrix.entry_count()));
  for (int t = 0; t < matrix.q_count; ++t) {
    for (const SparseColumnEntry& entry : matrix.columns[static_cast<std::size_t>(t)]) {
      entries.push_back(
          {entry.value, gt.is_soft(entry.index, t), gt.is_hard(entry.index, t)});
    }
  }

  detail::sort_descending(entries);
  const double hard_total = static_cast<double>(gt.hard.size());
  PrCurve curve;
  std::int64_t retrieved = 0;
  std::int64_t soft_hits = 0;
  std::int64_t hard_hits = 0;
  for (std::size_t j = 0; j < entries.size();) {
    const double threshold = entries[j].value;
    for (; j < entries.size() && entries[j].value == threshold; ++j) {
      ++retrieved;
      if (entries[j].soft) ++soft_hits;
      if (entries[j].hard) ++hard_hits;
    }
    curve.points.push_back({static_cast<double>(hard_hits) / hard_total,
                            static_cast<double>(soft_hits) / static_cast<double>(retrieved)});
  }
  curve.auc = detail::anchored_trapezoid(curve.points);
  return curve;
}

enum class EvalMode { single, multi };

inline const char* mode_name(EvalMode mode) {
  return mode == EvalMode::single ? "single" : "multi";
}

inline EvalMode parse_mode(const std::string& name) {
  if (name == "single") return EvalMode::single;
  if (name == "multi") return EvalMode::multi;
  throw usage_error("unknown mode '" + name + "' (expected single or multi)");
}

struct EvalReport {
  EvalMode mode = EvalMode::single;
  double auc = 0.0;
  double evaluated_pair_percentage = 0.0;
  double gt_min_percentage = 0.0;
  double gt_max_percentage = 0.0;
};

struct DensityStats {
  double evaluated_pair_percentage = 0.0;
  double gt_min_percentage = 0.0;
  double gt_max_percentage = 0.0;
};

inline DensityStats density_report(const SparseSimilarityMatrix& matrix, const GroundTruth& gt) {
  const double cells =
      static_cast<double>(matrix.db_count) * static_cast<double>(matrix.q_count);
  DensityStats stats;
  stats.evaluated_pair_percentage = matrix.density_percentage();
  stats.gt_min_percentage = 100.0 * static_cast<double>(gt.hard.size()) / cells;
  stats.gt_max_percentage = 100.0 * static_cast<double>(gt.soft.size()) / cells;
  return stats;
}

inline EvalReport evaluate(const SparseSimilarityMatrix& matrix, const GroundTruth& gt,
                           EvalMode mode) {
  const PrCurve curve = mode == EvalMode::single ? single_matching_curve(matrix, gt)
                                                 : multi_matching_curve(matrix, gt);
  const DensityStats stats = density_report(matrix, gt);
  EvalReport report;
  report.mode = mode;
  report.auc = curve.auc;
  report.evaluated_pair_percentage = stats.evaluated_pair_percentage;
  report.gt_min_percentage = stats.gt_min_percentage;
  report.gt_max_percentage = stats.gt_max_percentage;
  return report;
}

struct TradeOffRow {
  std::string method;
  EvalMode mode = EvalMode::single;
  double auc = 0.0;
  double density_pct = 0.0;
  double rel_auc_vs_full = 0.0;
};

// Relative AUC change of each method against the full-comparison baseline,
// paired with the density that bought it.
inline std::vector<TradeOffRow> compare_runs(
    const std::vector<std::pair<std::string, EvalReport>>& reports, const EvalReport& baseline) {
  if (baseline.auc == 0.0) throw domain_error("baseline AUC is zero; relative change undefined");
  std::vector<TradeOffRow> rows;
  rows.reserve(reports.size());
  for (const auto& [method, report] : reports) {
    if (report.mode != baseline.mode) {
      throw validation_error("report '" + method + "' mode differs from the baseline mode");
    }
    rows.push_back({method, report.mode, report.auc, report.evaluated_pair_percentage,
                    report.auc / baseline.auc - 1.0});
  }
  return rows;
}

inline void save_tradeoff_csv(const std::vector<TradeOffRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "method,mode,auc,density_pct,rel_auc_vs_full\n";
  char buffer[160];
  for (const TradeOffRow& row : rows) {
    std::snprintf(buffer, sizeof(buffer), "%s,%s,%.9g,%.9g,%.9g", row.method.c_str(),
                  mode_name(row.mode), row.auc, row.density_pct, row.rel_auc_vs_full);
    out << buffer << '\n';
  }
  if (!out) throw io_error("write to '" + path + "' failed");
}

}  // namespace epr
