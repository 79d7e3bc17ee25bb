#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "epr/descriptor_set.hpp"
#include "epr/errors.hpp"
#include "epr/sparse_matrix.hpp"

namespace epr {

// EPRD descriptor file, little-endian:
//   magic "EPRD" | u16 version = 1 | u16 reserved = 0 | u32 count | u32 dim
//   followed by count*dim IEEE-754 float32 values, row-major.
inline constexpr std::array<char, 4> kEprdMagic = {'E', 'P', 'R', 'D'};
inline constexpr std::uint16_t kEprdVersion = 1;

namespace detail {

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool read_raw(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return in.gcount() == static_cast<std::streamsize>(sizeof(T));
}

}  // namespace detail

inline void save_descriptors(const DescriptorSet& set, const std::string& path) {
  validate(set);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out.write(kEprdMagic.data(), kEprdMagic.size());
  detail::write_raw(out, kEprdVersion);
  detail::write_raw(out, std::uint16_t{0});
  detail::write_raw(out, static_cast<std::uint32_t>(set.count));
  detail::write_raw(out, static_cast<std::uint32_t>(set.dim));
  std::vector<float> row(static_cast<std::size_t>(set.dim));
  for (int i = 0; i < set.count; ++i) {
    auto src = set.row(i);
    std::transform(src.begin(), src.end(), row.begin(),
                   [](double x) { return static_cast<float>(x); });
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw io_error("write to '" + path + "' failed");
}

inline DescriptorSet load_descriptors(const std::string& path,
                                      DescriptorRole role = DescriptorRole::database) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");

  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 4 || magic != kEprdMagic) {
    throw format_error("'" + path + "' is not an EPRD file (bad magic)");
  }
  std::uint16_t version = 0;
  std::uint16_t reserved = 0;
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  if (!detail::read_raw(in, version) || !detail::read_raw(in, reserved) ||
      !detail::read_raw(in, count) || !detail::read_raw(in, dim)) {
    throw truncation_error("'" + path + "': header truncated");
  }
  if (version != kEprdVersion) {
    throw format_error("'" + path + "': unsupported EPRD version " + std::to_string(version));
  }
  const std::uint64_t cells = static_cast<std::uint64_t>(count) * dim;
  if (cells > (std::uint64_t{1} << 31)) {
    throw format_error("'" + path + "': implausible count*dim = " + std::to_string(cells));
  }

  DescriptorSet set;
  set.count = static_cast<int>(count);
  set.dim = static_cast<int>(dim);
  set.role = role;
  set.data.resize(cells);
  std::vector<float> payload(cells);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(cells * sizeof(float)));
  if (in.gcount() != static_cast<std::streamsize>(cells * sizeof(float))) {
    throw truncation_error("'" + path + "': payload shorter than count*dim values");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw truncation_error("'" + path + "': trailing bytes after count*dim values");
  }
  std::transform(payload.begin(), payload.end(), set.data.begin(),
                 [](float x) { return static_cast<double>(x); });
  validate(set);
  return set;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

inline int parse_index(const std::string& token, const std::string& path, int line_no) {
  try {
    std::size_t pos = 0;
    const int value = std::stoi(token, &pos);
    if (pos != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw format_error("'" + path + "' line " + std::to_string(line_no) +
                       ": cannot parse index '" + token + "'");
  }
}

}  // namespace detail

// Ground-truth CSV: one `db_index,query_index,label` pair per line with
// label in {hard, soft}; `#`-prefixed comment lines and blank lines ignored.
// Hard pairs are implicitly added to soft.
inline GroundTruth load_ground_truth(const std::string& path, int db_count, int q_count) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");

  GroundTruth gt;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    std::istringstream fields(stripped);
    std::string db_token, q_token, label;
    if (!std::getline(fields, db_token, ',') || !std::getline(fields, q_token, ',') ||
        !std::getline(fields, label)) {
      throw format_error("'" + path + "' line " + std::to_string(line_no) +
                         ": expected db_index,query_index,label");
    }
    const int db_index = detail::parse_index(detail::trim(db_token), path, line_no);
    const int q_index = detail::parse_index(detail::trim(q_token), path, line_no);
    label = detail::trim(label);

    if (db_index < 0 || db_index >= db_count) {
      throw range_error("'" + path + "' line " + std::to_string(line_no) + ": db index " +
                        std::to_string(db_index) + " outside [0, " + std::to_string(db_count) +
                        ")");
    }
    if (q_index < 0 || q_index >= q_count) {
      throw range_error("'" + path + "' line " + std::to_string(line_no) + ": query index " +
                        std::to_string(q_index) + " outside [0, " + std::to_string(q_count) +
                        ")");
    }
    if (label == "hard") {
      gt.hard.insert({db_index, q_index});
      gt.soft.insert({db_index, q_index});
    } else if (label == "soft") {
      gt.soft.insert({db_index, q_index});
    } else {
      throw format_error("'" + path + "' line " + std::to_string(line_no) + ": unknown label '" +
                         label + "'");
    }
  }
  return gt;
}

inline void save_ground_truth(const GroundTruth& gt, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  for (const auto& [db_index, q_index] : gt.hard) {
    out << db_index << ',' << q_index << ",hard\n";
  }
  for (const auto& pair : gt.soft) {
    if (gt.hard.count(pair) != 0) continue;
    out << pair.first << ',' << pair.second << ",soft\n";
  }
  if (!out) throw io_error("write to '" + path + "' failed");
}

// Sparse similarity CSV: `db_index,query_index,similarity`, column-major
// (query ascending, then db ascending), similarity printed to 9 significant
// digits.
inline void save_sparse_csv(const SparseSimilarityMatrix& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  char buffer[64];
  for (int t = 0; t < static_cast<int>(matrix.columns.size()); ++t) {
    for (const auto& entry : matrix.columns[t]) {
      std::snprintf(buffer, sizeof(buffer), "%d,%d,%.9g", entry.index, t, entry.value);
      out << buffer << '\n';
    }
  }
  if (!out) throw io_error("write to '" + path + "' failed");
}

inline SparseSimilarityMatrix load_sparse_csv(const std::string& path, int db_count, int q_count) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");

  SparseSimilarityMatrix matrix;
  matrix.db_count = db_count;
  matrix.q_count = q_count;
  matrix.columns.resize(static_cast<std::size_t>(q_count));

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = detail::trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    std::istringstream fields(stripped);
    std::string db_token, q_token, sim_token;
    if (!std::getline(fields, db_token, ',') || !std::getline(fields, q_token, ',') ||
        !std::getline(fields, sim_token)) {
      throw format_error("'" + path + "' line " + std::to_string(line_no) +
                         ": expected db_index,query_index,similarity");
    }
    const int db_index = detail::parse_index(detail::trim(db_token), path, line_no);
    const int q_index = detail::parse_index(detail::trim(q_token), path, line_no);
    if (db_index < 0 || db_index >= db_count) {
      throw range_error("'" + path + "' line " + std::to_string(line_no) + ": db index " +
                        std::to_string(db_index) + " outside [0, " + std::to_string(db_count) +
                        ")");
    }
    if (q_index < 0 || q_index >= q_count) {
      throw range_error("'" + path + "' line " + std::to_string(line_no) + ": query index " +
                        std::to_string(q_index) + " outside [0, " + std::to_string(q_count) +
                        ")");
    }
    double value = 0.0;
    try {
      std::size_t pos = 0;
      value = std::stod(detail::trim(sim_token), &pos);
      if (pos != detail::trim(sim_token).size()) throw std::invalid_argument(sim_token);
    } catch (const std::exception&) {
      throw format_error("'" + path + "' line " + std::to_string(line_no) +
                         ": cannot parse similarity '" + sim_token + "'");
    }
    if (!std::isfinite(value) || value < -1.0 - 1e-9 || value > 1.0 + 1e-9) {
      throw validation_error("'" + path + "' line " + std::to_string(line_no) + ": similarity " +
                             sim_token + " outside [-1, 1]");
    }
    matrix.columns[static_cast<std::size_t>(q_index)].push_back(
        {db_index, std::clamp(value, -1.0, 1.0)});
  }
  for (auto& column : matrix.columns) {
    std::sort(column.begin(), column.end(),
              [](const SparseColumnEntry& a, const SparseColumnEntry& b) {
                return a.index < b.index;
              });
  }
  return matrix;
}

}  // namespace epr
