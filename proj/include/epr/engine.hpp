#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epr/autotune.hpp"
#include "epr/descriptor_set.hpp"
#include "epr/errors.hpp"
#include "epr/similarity.hpp"
#include "epr/sparse_matrix.hpp"

namespace epr {

enum class RelocStrategy { periodic, event_based, full_baseline, no_sdb };

inline const char* strategy_name(RelocStrategy strategy) {
  switch (strategy) {
    case RelocStrategy::periodic: return "pr";
    case RelocStrategy::event_based: return "er";
    case RelocStrategy::full_baseline: return "full";
    case RelocStrategy::no_sdb: return "pr-no-sdb";
  }
  throw domain_error("unknown strategy");
}

inline RelocStrategy parse_strategy(const std::string& name) {
  if (name == "pr") return RelocStrategy::periodic;
  if (name == "er") return RelocStrategy::event_based;
  if (name == "full") return RelocStrategy::full_baseline;
  if (name == "pr-no-sdb") return RelocStrategy::no_sdb;
  throw usage_error("unknown strategy '" + name + "' (expected pr, er, full, or pr-no-sdb)");
}

struct EprConfig {
  int k = 5;
  int v = 5;
  RelocStrategy strategy = RelocStrategy::periodic;
  int t_reloc = 100;
  double p_db = kDefaultPDb;
  double p_reloc = kDefaultPReloc;
  bool standardize_db = true;
};

inline void validate(const EprConfig& config) {
  if (config.k < 1) throw validation_error("k must be >= 1");
  if (config.v < 0) throw validation_error("v must be >= 0");
  const bool needs_period = config.strategy == RelocStrategy::periodic ||
                            config.strategy == RelocStrategy::no_sdb;
  if (needs_period && config.t_reloc < 1) throw validation_error("t_reloc must be >= 1");
  if (!(config.p_db > 0.0) || !(config.p_db < 1.0)) {
    throw validation_error("p_db must lie strictly in (0, 1)");
  }
  if (!(config.p_reloc > 0.0) || !(config.p_reloc < 1.0)) {
    throw validation_error("p_reloc must lie strictly in (0, 1)");
  }
}

// Single pass over the snapshot of the candidate set: for every member, all
// database indices whose intra-database similarity reaches theta join the
// set. Neighbors of neighbors are not chased.
inline CandidateSet expand_intra_db(CandidateSet candidates, const IntraDbSimilarities& sdb,
                                    double theta) {
  const std::vector<int> snapshot = candidates.indices;
  for (int c : snapshot) {
    const float* row = sdb.values.data() + static_cast<std::size_t>(c) * sdb.size;
    for (int j = 0; j < sdb.size; ++j) {
      if (static_cast<double>(row[j]) >= theta) candidates.insert(j);
    }
  }
  return candidates;
}

// Adds the v database successors of every snapshot member; the database is
// temporal, not cyclic, so indices past the end are dropped.
inline CandidateSet expand_sequence(CandidateSet candidates, int v, int db_count) {
  const std::vector<int> snapshot = candidates.indices;
  for (int c : snapshot) {
    const int stop = std::min(c + v, db_count - 1);
    for (int j = c + 1; j <= stop; ++j) candidates.insert(j);
  }
  return candidates;
}

// Largest count over rows of off-diagonal intra-database entries >= theta;
// bounds the per-step expansion fan-out.
inline int max_intra_db_degree(const IntraDbSimilarities& sdb, double theta) {
  int worst = 0;
  for (int i = 0; i < sdb.size; ++i) {
    int degree = 0;
    const float* row = sdb.values.data() + static_cast<std::size_t>(i) * sdb.size;
    for (int j = 0; j < sdb.size; ++j) {
      if (j != i && static_cast<double>(row[j]) >= theta) ++degree;
    }
    worst = std::max(worst, degree);
  }
  return worst;
}

// Online matcher: holds the database, its intra-database similarities, and
// the auto-tuned thresholds; queries are fed strictly in temporal order, one
// at a time.
class Engine {
 public:
  Engine(DescriptorSet db, EprConfig config) : db_(std::move(db)), config_(config) {
    const auto start = std::chrono::steady_clock::now();
    validate(db_);
    validate(config_);
    const auto sdb_start = std::chrono::steady_clock::now();
    sdb_ = intra_db_matrix(db_, config_.standardize_db);
    const auto sdb_stop = std::chrono::steady_clock::now();
    theta_db_ = autotune(upper_triangle(sdb_), config_.p_db).theta;

    db_squares_.resize(static_cast<std::size_t>(db_.count));
    for (int i = 0; i < db_.count; ++i) {
      db_squares_[static_cast<std::size_t>(i)] = squared_norm(db_.row(i));
    }
    const auto stop = std::chrono::steady_clock::now();
    sdb_seconds_ = std::chrono::duration<double>(sdb_stop - sdb_start).count();
    init_seconds_ = std::chrono::duration<double>(stop - start).count() - sdb_seconds_;
  }

  // Initial relocalization: the first query is compared against the whole
  // database, and that column calibrates theta_reloc.
  SparseColumn process_first_query(std::span<const double> q) {
    if (processed_ != 0) throw domain_error("first query already processed");
    const double q_square = check_query(q);
    const SparseColumn column = full_column(q, q_square);
    std::vector<double> samples;
    samples.reserve(column.size());
    for (const auto& entry : column) samples.push_back(entry.value);
    theta_reloc_ = autotune(std::move(samples), config_.p_reloc).theta;
    reloc_events_.push_back(0);
    prev_column_ = column;
    processed_ = 1;
    return column;
  }

  SparseColumn process_query(std::span<const double> q) {
    if (processed_ == 0) throw domain_error("process_first_query must run first");
    const double q_square = check_query(q);
    const bool use_sdb = config_.strategy != RelocStrategy::no_sdb;

    CandidateSet candidates = k_argmax(prev_column_, config_.k);
    if (use_sdb) candidates = expand_intra_db(candidates, sdb_, theta_db_);
    candidates = expand_sequence(candidates, config_.v, db_.count);

    SparseColumn column;
    column.reserve(candidates.indices.size());
    for (int c : candidates.indices) column.push_back({c, compare(c, q, q_square)});

    if (relocalize_decision(config_, processed_ + 1, theta_reloc_, column)) {
      column = full_column(q, q_square);
      reloc_events_.push_back(processed_);
    } else if (use_sdb) {
      CandidateSet refreshed = k_argmax(column, config_.k);
      refreshed = expand_intra_db(refreshed, sdb_, theta_db_);
      bool grew = false;
      for (int c : refreshed.indices) {
        if (!candidates.contains(c)) {
          column.push_back({c, compare(c, q, q_square)});
          grew = true;
        }
      }
      if (grew) {
        std::sort(column.begin(), column.end(),
                  [](const SparseColumnEntry& a, const SparseColumnEntry& b) {
                    return a.index < b.index;
                  });
      }
    }

    prev_column_ = column;
    ++processed_;
    return column;
  }

  // t is the 1-based query index of Algorithm 1; the column is the sparse
  // comparison result of the current step, before any refresh.
  static bool relocalize_decision(const EprConfig& config, int t, double theta_reloc,
                                  const SparseColumn& column) {
    switch (config.strategy) {
      case RelocStrategy::full_baseline:
        return true;
      case RelocStrategy::periodic:
      case RelocStrategy::no_sdb:
        return t % config.t_reloc == 0;
      case RelocStrategy::event_based:
        for (const auto& entry : column) {
          if (entry.value >= theta_reloc) return false;
        }
        return true;
    }
    throw domain_error("unknown strategy");
  }

  int db_count() const { return db_.count; }
  int dim() const { return db_.dim; }
  int processed() const { return processed_; }
  double theta_db() const { return theta_db_; }
  double theta_reloc() const {
    if (processed_ == 0) throw domain_error("theta_reloc is fitted on the first query");
    return theta_reloc_;
  }
  const std::vector<int>& reloc_events() const { return reloc_events_; }
  const IntraDbSimilarities& sdb() const { return sdb_; }
  double sdb_seconds() const { return sdb_seconds_; }
  double init_seconds() const { return init_seconds_; }

 private:
  double check_query(std::span<const double> q) const {
    if (static_cast<int>(q.size()) != db_.dim) {
      throw domain_error("query dimension " + std::to_string(q.size()) +
                         " does not match database dimension " + std::to_string(db_.dim));
    }
    return squared_norm(q);
  }

  double compare(int c, std::span<const double> q, double q_square) const {
    return cosine_from_products(dot(db_.row(c), q), db_squares_[static_cast<std::size_t>(c)],
                                q_square);
  }

  SparseColumn full_column(std::span<const double> q, double q_square) const {
    SparseColumn column;
    column.reserve(static_cast<std::size_t>(db_.count));
    for (int c = 0; c < db_.count; ++c) column.push_back({c, compare(c, q, q_square)});
    return column;
  }

  DescriptorSet db_;
  EprConfig config_;
  IntraDbSimilarities sdb_;
  std::vector<double> db_squares_;
  double theta_db_ = 0.0;
  double theta_reloc_ = 0.0;
  SparseColumn prev_column_;
  int processed_ = 0;
  std::vector<int> reloc_events_;
  double sdb_seconds_ = 0.0;
  double init_seconds_ = 0.0;
};

struct RunReport {
  std::int64_t evaluated_pairs = 0;
  double density_percentage = 0.0;
  std::vector<int> reloc_events;
  double theta_db = 0.0;
  double theta_reloc = 0.0;
  double init_seconds = 0.0;
  double sdb_seconds = 0.0;
  double query_loop_seconds = 0.0;
  double total_seconds = 0.0;
};

inline std::pair<SparseSimilarityMatrix, RunReport> run(const DescriptorSet& db,
                                                        const DescriptorSet& query,
                                                        const EprConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  validate(query);
  if (db.dim != query.dim) {
    throw domain_error("query dimension " + std::to_string(query.dim) +
                       " does not match database dimension " + std::to_string(db.dim));
  }

  Engine engine(db, config);
  SparseSimilarityMatrix matrix;
  matrix.db_count = db.count;
  matrix.q_count = query.count;
  matrix.columns.resize(static_cast<std::size_t>(query.count));

  const auto loop_start = std::chrono::steady_clock::now();
  matrix.columns[0] = engine.process_first_query(query.row(0));
  for (int t = 1; t < query.count; ++t) {
    matrix.columns[static_cast<std::size_t>(t)] = engine.process_query(query.row(t));
  }
  const auto stop = std::chrono::steady_clock::now();

  RunReport report;
  report.evaluated_pairs = matrix.entry_count();
  report.density_percentage = matrix.density_percentage();
  report.reloc_events = engine.reloc_events();
  report.theta_db = engine.theta_db();
  report.theta_reloc = engine.theta_reloc();
  report.init_seconds = engine.init_seconds();
  report.sdb_seconds = engine.sdb_seconds();
  report.query_loop_seconds = std::chrono::duration<double>(stop - loop_start).count();
  report.total_seconds = std::chrono::duration<double>(stop - start).count();
  return {std::move(matrix), report};
}

}  // namespace epr
