#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "epr/descriptor_set.hpp"
#include "epr/errors.hpp"
#include "epr/sparse_matrix.hpp"

namespace epr {

// Sequential left-to-right accumulation. Every similarity in the project is
// produced through dot/squared_norm/cosine_from_products so that cached-norm
// paths stay bit-identical to cosine_similarity.
inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw domain_error("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                       std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return sum;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double cosine_from_products(double dot_ab, double dot_aa, double dot_bb) {
  if (!(dot_aa > 0.0) || !(dot_bb > 0.0)) throw domain_error("zero-norm input to cosine");
  return std::clamp(dot_ab / std::sqrt(dot_aa * dot_bb), -1.0, 1.0);
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine_from_products(dot(a, b), squared_norm(a), squared_norm(b));
}

// Per-dimension (x - mean) / std over the database rows, population std
// (divide by N). Dimensions with std below 1e-12 are only mean-centered.
inline DescriptorSet standardize(const DescriptorSet& db) {
  validate_matrix(db);
  if (db.count < 2) throw domain_error("standardize needs at least 2 rows");
  const std::size_t dim = static_cast<std::size_t>(db.dim);
  std::vector<double> mean(dim, 0.0);
  for (int i = 0; i < db.count; ++i) {
    auto row = db.row(i);
    for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
  }
  for (double& m : mean) m /= db.count;

  std::vector<double> stddev(dim, 0.0);
  for (int i = 0; i < db.count; ++i) {
    auto row = db.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      const double delta = row[d] - mean[d];
      stddev[d] += delta * delta;
    }
  }
  for (double& s : stddev) s = std::sqrt(s / db.count);

  DescriptorSet out = db;
  for (int i = 0; i < db.count; ++i) {
    double* row = out.data.data() + static_cast<std::size_t>(i) * dim;
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] -= mean[d];
      if (stddev[d] >= 1e-12) row[d] /= stddev[d];
    }
  }
  return out;
}

struct IntraDbSimilarities {
  int size = 0;
  std::vector<float> values;  // row-major size*size, symmetric, unit diagonal

  float at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(size) +
                  static_cast<std::size_t>(j)];
  }
};

inline IntraDbSimilarities intra_db_matrix(const DescriptorSet& db, bool use_standardization) {
  validate(db);
  if (db.count > kMaxDbCount) {
    throw validation_error("database has " + std::to_string(db.count) +
                           " descriptors, above the supported maximum " +
                           std::to_string(kMaxDbCount));
  }
  const DescriptorSet* rows = &db;
  DescriptorSet standardized;
  if (use_standardization) {
    standardized = standardize(db);
    for (int i = 0; i < standardized.count; ++i) {
      if (!(squared_norm(standardized.row(i)) > 0.0)) {
        throw domain_error("row " + std::to_string(i) +
                           " collapses to the zero vector under standardization");
      }
    }
    rows = &standardized;
  }

  const int n = rows->count;
  IntraDbSimilarities sdb;
  sdb.size = n;
  sdb.values.resize(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  std::vector<double> squares(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) squares[static_cast<std::size_t>(i)] = squared_norm(rows->row(i));

  for (int i = 0; i < n; ++i) {
    const auto row_i = rows->row(i);
    for (int j = i; j < n; ++j) {
      const double s =
          cosine_from_products(dot(row_i, rows->row(j)), squares[static_cast<std::size_t>(i)],
                               squares[static_cast<std::size_t>(j)]);
      const float value = static_cast<float>(s);
      sdb.values[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j)] = value;
      sdb.values[static_cast<std::size_t>(j) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(i)] = value;
    }
  }
  return sdb;
}

// Strict upper triangle (i < j), row-major order; the self-similarity
// diagonal is excluded from threshold fitting.
inline std::vector<double> upper_triangle(const IntraDbSimilarities& sdb) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(sdb.size) * (sdb.size - 1) / 2);
  for (int i = 0; i < sdb.size; ++i) {
    for (int j = i + 1; j < sdb.size; ++j) {
      out.push_back(static_cast<double>(sdb.at(i, j)));
    }
  }
  return out;
}

struct CandidateSet {
  std::vector<int> indices;  // ascending, distinct

  bool contains(int index) const {
    return std::binary_search(indices.begin(), indices.end(), index);
  }
  // Returns true if the index was absent and has been inserted.
  bool insert(int index) {
    auto it = std::lower_bound(indices.begin(), indices.end(), index);
    if (it != indices.end() && *it == index) return false;
    indices.insert(it, index);
    return true;
  }
};

// K largest values among the entries present; ties broken by smaller index.
inline CandidateSet k_argmax(const SparseColumn& column, int k) {
  if (k < 1) throw domain_error("k must be >= 1");
  std::vector<SparseColumnEntry> entries(column.begin(), column.end());
  const std::size_t keep = std::min(entries.size(), static_cast<std::size_t>(k));
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    entries.end(), [](const SparseColumnEntry& a, const SparseColumnEntry& b) {
                      if (a.value != b.value) return a.value > b.value;
                      return a.index < b.index;
                    });
  CandidateSet out;
  out.indices.reserve(keep);
  for (std::size_t j = 0; j < keep; ++j) out.indices.push_back(entries[j].index);
  std::sort(out.indices.begin(), out.indices.end());
  return out;
}

// All database indices whose similarity to c reaches theta; contains c itself
// whenever theta <= 1.
inline CandidateSet intra_db_neighbors(const IntraDbSimilarities& sdb, int c, double theta) {
  if (c < 0 || c >= sdb.size) {
    throw range_error("db index " + std::to_string(c) + " outside [0, " +
                      std::to_string(sdb.size) + ")");
  }
  CandidateSet out;
  const float* row = sdb.values.data() + static_cast<std::size_t>(c) * sdb.size;
  for (int j = 0; j < sdb.size; ++j) {
    if (static_cast<double>(row[j]) >= theta) out.indices.push_back(j);
  }
  return out;
}

}  // namespace epr
