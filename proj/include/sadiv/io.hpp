#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "sadiv/similarity.hpp"
#include "sadiv/simplex.hpp"

namespace sadiv::io {

// Numbers are written with 17 significant digits so text round-trips are
// bit-exact for doubles.
std::string format_double(double v);

struct Table {
  std::vector<std::string> column_names;  // header minus the id column
  std::vector<std::string> row_ids;       // first column
  Eigen::MatrixXd values;
};

// Plain comma-separated values, no quoting; ragged rows are an error.
Table read_table_csv(const std::filesystem::path& path);
void write_table_csv(const std::filesystem::path& path, const Table& t);

enum class MatrixKind { kDistance, kSimilarity, kAbundance };

// Square matrix CSV with a shared header row / id column for distance and
// similarity kinds; abundance tables may be rectangular. Kind-specific
// invariants are checked and violations are reported with their indices.
Table read_matrix_csv(const std::filesystem::path& path, MatrixKind kind);

SimilarityMatrix to_similarity(const Table& t);
DistanceMatrix to_distance(const Table& t);

// One distribution per row; entries are validated simplex points.
std::vector<Distribution> read_distributions_csv(
    const std::filesystem::path& path, double tolerance = kSimplexTol);

// Distributions plus a named weight column (weights renormalized to sum 1).
struct WeightedRows {
  std::vector<Distribution> distributions;
  Eigen::VectorXd weights;
};
WeightedRows read_weighted_distributions_csv(const std::filesystem::path& path,
                                             const std::string& weights_column,
                                             double tolerance = kSimplexTol);

void write_distributions_csv(const std::filesystem::path& path,
                             const std::vector<std::string>& element_ids,
                             const std::vector<Distribution>& rows);

// JSON array (single distribution) or array of arrays.
std::vector<Distribution> read_distributions_json(
    const std::filesystem::path& path, double tolerance = kSimplexTol);
void write_distributions_json(const std::filesystem::path& path,
                              const std::vector<Distribution>& rows);

// Hierarchy: CSV of element,code1,...,codeL plus a JSON level->similarity map
// {"0": s0, ..., "L": 1.0}.
Hierarchy read_hierarchy(const std::filesystem::path& paths_csv,
                         const std::filesystem::path& levels_json);

// FNV-1a 64-bit digest of the raw file bytes, as hex.
std::string file_digest(const std::filesystem::path& path);

}  // namespace sadiv::io
