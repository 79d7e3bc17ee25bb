#pragma once

#include <cmath>
#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epr/errors.hpp"

namespace epr {

// Dense intra-database similarities are stored as a full matrix, so the
// database size is capped to keep memory in the hundreds of megabytes.
inline constexpr int kMaxDbCount = 20000;

enum class DescriptorRole { database, query };

// Ordered sequence of real descriptor vectors, one row per image.
// Row order is temporal: consecutive rows are consecutive frames.
struct DescriptorSet {
  int count = 0;
  int dim = 0;
  std::vector<double> data;  // row-major, count * dim entries
  DescriptorRole role = DescriptorRole::database;

  std::span<const double> row(int i) const {
    return {data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

// Shape and finiteness checks only; standardization accepts zero rows (the
// statistics are still defined), so the norm requirement is separate.
inline void validate_matrix(const DescriptorSet& set) {
  if (set.count < 1 || set.dim < 1) {
    throw validation_error("descriptor set must have count >= 1 and dim >= 1 (got count=" +
                           std::to_string(set.count) + ", dim=" + std::to_string(set.dim) + ")");
  }
  const std::size_t expected =
      static_cast<std::size_t>(set.count) * static_cast<std::size_t>(set.dim);
  if (set.data.size() != expected) {
    throw validation_error("descriptor data size " + std::to_string(set.data.size()) +
                           " does not match count*dim = " + std::to_string(expected));
  }
  for (int i = 0; i < set.count; ++i) {
    for (double x : set.row(i)) {
      if (!std::isfinite(x)) {
        throw validation_error("non-finite entry in descriptor row " + std::to_string(i));
      }
    }
  }
}

// Enforces the full DescriptorSet invariants: validate_matrix plus a nonzero
// Euclidean norm per row (cosine similarity must be defined for every row).
inline void validate(const DescriptorSet& set) {
  validate_matrix(set);
  for (int i = 0; i < set.count; ++i) {
    double norm2 = 0.0;
    for (double x : set.row(i)) norm2 += x * x;
    if (norm2 == 0.0) {
      throw validation_error("descriptor row " + std::to_string(i) + " has zero norm");
    }
  }
}

// Boolean relations over database x query index pairs. `hard` pairs must be
// found by a matcher, `soft` pairs are allowed but not required; hard is kept
// a subset of soft at all times.
struct GroundTruth {
  std::set<std::pair<int, int>> hard;  // (db_index, query_index)
  std::set<std::pair<int, int>> soft;  // superset of hard

  bool is_hard(int db_index, int query_index) const {
    return hard.count({db_index, query_index}) != 0;
  }
  bool is_soft(int db_index, int query_index) const {
    return soft.count({db_index, query_index}) != 0;
  }
};

}  // namespace epr
