#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "epr/descriptor_set.hpp"
#include "epr/errors.hpp"

namespace epr {

// Query-route sentinel for a place that does not occur in the database.
inline constexpr int kExplore = -1;

struct SyntheticSpec {
  int num_places = 1;
  int dim = 16;
  std::vector<int> db_route;     // place index per database frame
  std::vector<int> query_route;  // place index per query frame, or kExplore
  double condition_noise_sigma = 0.0;
  std::uint64_t rng_seed = 0;
};

inline void validate(const SyntheticSpec& spec) {
  if (spec.num_places < 1) throw validation_error("num_places must be >= 1");
  if (spec.dim < 1) throw validation_error("dim must be >= 1");
  if (spec.db_route.empty()) throw validation_error("db_route must be nonempty");
  if (spec.query_route.empty()) throw validation_error("query_route must be nonempty");
  if (!(spec.condition_noise_sigma >= 0.0) || !std::isfinite(spec.condition_noise_sigma)) {
    throw validation_error("condition_noise_sigma must be finite and >= 0");
  }
  for (int place : spec.db_route) {
    if (place < 0 || place >= spec.num_places) {
      throw validation_error("db_route entry " + std::to_string(place) + " outside [0, " +
                             std::to_string(spec.num_places) + ")");
    }
  }
  for (int place : spec.query_route) {
    if (place == kExplore) continue;
    if (place < 0 || place >= spec.num_places) {
      throw validation_error("query_route entry " + std::to_string(place) + " outside [0, " +
                             std::to_string(spec.num_places) + ")");
    }
  }
}

struct SyntheticDataset {
  DescriptorSet db;
  DescriptorSet query;
  GroundTruth gt;
};

namespace detail {

inline void normalize_row(std::vector<double>& row) {
  double sum = 0.0;
  for (double x : row) sum += x * x;
  const double norm = std::sqrt(sum);
  if (!(norm > 0.0)) throw domain_error("cannot normalize zero vector");
  for (double& x : row) x /= norm;
}

inline std::vector<double> draw_unit_vector(std::mt19937_64& rng,
                                            std::normal_distribution<double>& gauss, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  for (double& x : v) x = gauss(rng);
  normalize_row(v);
  return v;
}

}  // namespace detail

// Deterministic trajectory generator: each place owns a latent unit vector,
// each frame is the normalized latent plus isotropic Gaussian noise. Explore
// frames draw a fresh latent never used by the database. The Gaussian stream
// is consumed in a fixed order (latents, db rows, query rows), so sigma = 0
// reproduces the exact draws of the noisy case with the noise scaled away.
inline SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.rng_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<std::vector<double>> latents;
  latents.reserve(static_cast<std::size_t>(spec.num_places));
  for (int p = 0; p < spec.num_places; ++p) {
    latents.push_back(detail::draw_unit_vector(rng, gauss, spec.dim));
  }

  const int db_count = static_cast<int>(spec.db_route.size());
  const int q_count = static_cast<int>(spec.query_route.size());
  const std::size_t dim = static_cast<std::size_t>(spec.dim);

  SyntheticDataset out;
  out.db.count = db_count;
  out.db.dim = spec.dim;
  out.db.role = DescriptorRole::database;
  out.db.data.resize(static_cast<std::size_t>(db_count) * dim);
  out.query.count = q_count;
  out.query.dim = spec.dim;
  out.query.role = DescriptorRole::query;
  out.query.data.resize(static_cast<std::size_t>(q_count) * dim);

  std::vector<double> row(dim);
  auto emit_row = [&](const std::vector<double>& latent, std::vector<double>& dst,
                      std::size_t row_index) {
    for (std::size_t k = 0; k < dim; ++k) {
      row[k] = latent[k] + spec.condition_noise_sigma * gauss(rng);
    }
    detail::normalize_row(row);
    std::copy(row.begin(), row.end(), dst.begin() + static_cast<std::ptrdiff_t>(row_index * dim));
  };

  for (int i = 0; i < db_count; ++i) {
    emit_row(latents[static_cast<std::size_t>(spec.db_route[i])], out.db.data,
             static_cast<std::size_t>(i));
  }
  for (int t = 0; t < q_count; ++t) {
    const int place = spec.query_route[t];
    if (place == kExplore) {
      const std::vector<double> fresh = detail::draw_unit_vector(rng, gauss, spec.dim);
      emit_row(fresh, out.query.data, static_cast<std::size_t>(t));
    } else {
      emit_row(latents[static_cast<std::size_t>(place)], out.query.data,
               static_cast<std::size_t>(t));
    }
  }
  validate(out.db);
  validate(out.query);

  std::vector<std::vector<int>> place_to_db(static_cast<std::size_t>(spec.num_places));
  for (int i = 0; i < db_count; ++i) {
    place_to_db[static_cast<std::size_t>(spec.db_route[i])].push_back(i);
  }
  for (int t = 0; t < q_count; ++t) {
    const int place = spec.query_route[t];
    if (place == kExplore) continue;
    for (int i : place_to_db[static_cast<std::size_t>(place)]) {
      out.gt.hard.insert({i, t});
    }
  }
  // Soft tolerance: one frame of slack along either trajectory.
  for (const auto& [i, t] : out.gt.hard) {
    out.gt.soft.insert({i, t});
    if (i > 0) out.gt.soft.insert({i - 1, t});
    if (i + 1 < db_count) out.gt.soft.insert({i + 1, t});
    if (t > 0) out.gt.soft.insert({i, t - 1});
    if (t + 1 < q_count) out.gt.soft.insert({i, t + 1});
  }
  return out;
}

}  // namespace epr
