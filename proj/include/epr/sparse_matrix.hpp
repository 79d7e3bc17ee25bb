#pragma once

#include <cstdint>
#include <vector>

#include "epr/errors.hpp"

namespace epr {

struct SparseColumnEntry {
  int index = 0;  // database row
  double value = 0.0;
};

// One query timestep's evaluated similarities, sorted by database index.
using SparseColumn = std::vector<SparseColumnEntry>;

// Database x query similarity matrix where only the evaluated pairs hold
// values. Column t collects every (db, query t) pair that was compared.
struct SparseSimilarityMatrix {
  int db_count = 0;
  int q_count = 0;
  std::vector<SparseColumn> columns;  // one per query, possibly empty

  std::int64_t entry_count() const {
    std::int64_t n = 0;
    for (const auto& column : columns) n += static_cast<std::int64_t>(column.size());
    return n;
  }

  // 100 * evaluated pairs / (db_count * q_count)
  double density_percentage() const {
    const double total = static_cast<double>(db_count) * static_cast<double>(q_count);
    if (total <= 0.0) return 0.0;
    return 100.0 * static_cast<double>(entry_count()) / total;
  }
};

}  // namespace epr
