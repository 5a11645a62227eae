#include "sadiv/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sadiv/errors.hpp"

namespace sadiv::io {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace and a trailing CR.
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("cannot parse number '" + s + "' in " + where);
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Table read_table_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.size() < 2) {
    throw InvalidInput(path.string() + " needs a header and at least one row");
  }
  const auto header = split_csv_line(lines.front());
  if (header.size() < 2) {
    throw InvalidInput(path.string() + " header needs an id column plus data");
  }
  Table t;
  t.column_names.assign(header.begin() + 1, header.end());
  const std::size_t ncols = t.column_names.size();
  const std::size_t nrows = lines.size() - 1;
  t.values.resize(static_cast<Eigen::Index>(nrows),
                  static_cast<Eigen::Index>(ncols));
  for (std::size_t r = 0; r < nrows; ++r) {
    const auto fields = split_csv_line(lines[r + 1]);
    if (fields.size() != ncols + 1) {
      throw InvalidInput(path.string() + " row " + std::to_string(r + 1) +
                         " has " + std::to_string(fields.size()) +
                         " fields, expected " + std::to_string(ncols + 1));
    }
    t.row_ids.push_back(fields[0]);
    for (std::size_t c = 0; c < ncols; ++c) {
      t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(fields[c + 1], path.string() + " row " + std::to_string(r + 1));
    }
  }
  return t;
}

void write_table_csv(const std::filesystem::path& path, const Table& t) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << "id";
  for (const auto& c : t.column_names) out << ',' << c;
  out << '\n';
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    out << t.row_ids[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
      out << ',' << format_double(t.values(r, c));
    }
    out << '\n';
  }
}

Table read_matrix_csv(const std::filesystem::path& path, MatrixKind kind) {
  Table t = read_table_csv(path);
  if (kind == MatrixKind::kAbundance) {
    for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
        if (t.values(r, c) < 0.0) {
          throw InvalidInput(path.string() + ": negative abundance at row " +
                             std::to_string(r) + ", column " + std::to_string(c));
        }
      }
    }
    return t;
  }
  if (t.values.rows() != t.values.cols()) {
    throw InvalidInput(path.string() + " must be square, got " +
                       std::to_string(t.values.rows()) + "x" +
                       std::to_string(t.values.cols()));
  }
  for (std::size_t i = 0; i < t.row_ids.size(); ++i) {
    if (t.row_ids[i] != t.column_names[i]) {
      throw InvalidInput(path.string() + ": header/id mismatch at position " +
                         std::to_string(i) + " ('" + t.row_ids[i] + "' vs '" +
                         t.column_names[i] + "')");
    }
  }
  return t;
}

SimilarityMatrix to_similarity(const Table& t) {
  return SimilarityMatrix::validated(t.values);
}

DistanceMatrix to_distance(const Table& t) {
  return DistanceMatrix::validated(t.values);
}

std::vector<Distribution> read_distributions_csv(
    const std::filesystem::path& path, double tolerance) {
  const Table t = read_table_csv(path);
  std::vector<Distribution> out;
  out.reserve(static_cast<std::size_t>(t.values.rows()));
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    out.push_back(Distribution::validated(t.values.row(r), tolerance));
  }
  return out;
}

WeightedRows read_weighted_distributions_csv(const std::filesystem::path& path,
                                             const std::string& weights_column,
                                             double tolerance) {
  const Table t = read_table_csv(path);
  Eigen::Index wcol = -1;
  for (std::size_t c = 0; c < t.column_names.size(); ++c) {
    if (t.column_names[c] == weights_column) {
      wcol = static_cast<Eigen::Index>(c);
      break;
    }
  }
  if (wcol < 0) {
    throw InvalidInput(path.string() + " has no column '" + weights_column + "'");
  }
  WeightedRows out;
  out.weights.resize(t.values.rows());
  for (Eigen::Index r = 0; r < t.values.rows(); ++r) {
    out.weights[r] = t.values(r, wcol);
    if (out.weights[r] < 0.0) {
      throw InvalidInput("negative weight in row " + std::to_string(r));
    }
    Eigen::VectorXd v(t.values.cols() - 1);
    Eigen::Index k = 0;
    for (Eigen::Index c = 0; c < t.values.cols(); ++c) {
      if (c != wcol) v[k++] = t.values(r, c);
    }
    out.distributions.push_back(Distribution::validated(v, tolerance));
  }
  const double ws = out.weights.sum();
  if (ws <= 0.0) throw InvalidInput("weights sum to zero");
  out.weights /= ws;
  return out;
}

void write_distributions_csv(const std::filesystem::path& path,
                             const std::vector<std::string>& element_ids,
                             const std::vector<Distribution>& rows) {
  Table t;
  t.column_names = element_ids;
  t.values.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(element_ids.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    t.row_ids.push_back("d" + std::to_string(r));
    t.values.row(static_cast<Eigen::Index>(r)) = rows[r].probs();
  }
  write_table_csv(path, t);
}

std::vector<Distribution> read_distributions_json(
    const std::filesystem::path& path, double tolerance) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  if (!j.is_array()) throw InvalidInput(path.string() + " must be a JSON array");
  std::vector<Distribution> out;
  auto parse_one = [&](const nlohmann::json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    out.push_back(Distribution::validated(v, tolerance));
  };
  if (!j.empty() && j.front().is_array()) {
    for (const auto& row : j) parse_one(row);
  } else {
    parse_one(j);
  }
  return out;
}

void write_distributions_json(const std::filesystem::path& path,
                              const std::vector<Distribution>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& d : rows) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < d.size(); ++i) row.push_back(d.probs()[i]);
    j.push_back(std::move(row));
  }
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Hierarchy read_hierarchy(const std::filesystem::path& paths_csv,
                         const std::filesystem::path& levels_json) {
  const auto lines = read_lines(paths_csv);
  if (lines.size() < 2) {
    throw InvalidInput(paths_csv.string() + " needs a header and rows");
  }
  const auto header = split_csv_line(lines.front());
  std::vector<std::vector<std::string>> paths;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_csv_line(lines[r]);
    if (fields.size() != header.size()) {
      throw InvalidInput(paths_csv.string() + " row " + std::to_string(r) +
                         " is ragged");
    }
    paths.emplace_back(fields.begin() + 1, fields.end());
  }

  std::ifstream in(levels_json);
  if (!in) throw InvalidInput("cannot open " + levels_json.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidInput(levels_json.string() + ": " + e.what());
  }
  std::vector<double> f(j.size(), 0.0);
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::size_t level = 0;
    try {
      level = std::stoul(it.key());
    } catch (const std::exception&) {
      throw InvalidInput("level key '" + it.key() + "' is not an integer");
    }
    if (level >= f.size()) {
      throw InvalidInput("level " + it.key() + " outside 0.." +
                         std::to_string(f.size() - 1));
    }
    f[level] = it.value().get<double>();
  }
  return Hierarchy::validated(std::move(paths), std::move(f));
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

}  // namespace sadiv::io
