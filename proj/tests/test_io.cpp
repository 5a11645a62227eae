#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "sadiv/errors.hpp"
#include "sadiv/io.hpp"
#include "sadiv/rng.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "sadiv_io_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("matrix CSV round trip is bit-identical") {
  sadiv::CounterRng rng(3);
  const auto Z = oracles::random_pd_similarity(7, rng);
  sadiv::io::Table t;
  t.values = Z.matrix();
  for (int i = 0; i < 7; ++i) t.row_ids.push_back("e" + std::to_string(i));
  t.column_names = t.row_ids;

  const auto path = temp_file("roundtrip.csv");
  sadiv::io::write_table_csv(path, t);
  const auto back = sadiv::io::read_matrix_csv(path, sadiv::io::MatrixKind::kSimilarity);
  CHECK(back.values.rows() == 7);
  for (Eigen::Index i = 0; i < 7; ++i) {
    for (Eigen::Index j = 0; j < 7; ++j) {
      CHECK(back.values(i, j) == t.values(i, j));  // exact, 17 digits
    }
  }

  // Rewriting the parsed table reproduces the same bytes.
  const auto path2 = temp_file("roundtrip2.csv");
  sadiv::io::Table t2;
  t2.values = back.values;
  t2.row_ids = back.row_ids;
  t2.column_names = back.column_names;
  sadiv::io::write_table_csv(path2, t2);
  std::ifstream f1(path), f2(path2);
  std::string s1((std::istreambuf_iterator<char>(f1)), {});
  std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
}

TEST_CASE("format_double survives text round trips") {
  sadiv::CounterRng rng(5);
  for (int t = 0; t < 1000; ++t) {
    const double v = (rng.next_double() - 0.5) * std::pow(10.0, static_cast<double>(rng.next_below(20)) - 10.0);
    CHECK(std::stod(sadiv::io::format_double(v)) == v);
  }
}

TEST_CASE("asymmetric similarity rejected with located entries") {
  const auto path = temp_file("asym.csv");
  write_text(path,
             "id,a,b\n"
             "a,1.0,0.5\n"
             "b,0.4,1.0\n");
  CHECK_THROWS_WITH_AS(
      sadiv::io::to_similarity(
          sadiv::io::read_matrix_csv(path, sadiv::io::MatrixKind::kSimilarity)),
      doctest::Contains("(0,1)"), sadiv::InvalidInput);
}

TEST_CASE("ragged and malformed tables rejected") {
  const auto path = temp_file("ragged.csv");
  write_text(path,
             "id,a,b\n"
             "r0,1.0\n");
  CHECK_THROWS_AS(sadiv::io::read_table_csv(path), sadiv::InvalidInput);

  const auto path2 = temp_file("notnum.csv");
  write_text(path2,
             "id,a\n"
             "r0,zebra\n");
  CHECK_THROWS_AS(sadiv::io::read_table_csv(path2), sadiv::InvalidInput);

  const auto path3 = temp_file("headermismatch.csv");
  write_text(path3,
             "id,a,b\n"
             "a,0.0,1.0\n"
             "c,1.0,0.0\n");
  CHECK_THROWS_AS(
      sadiv::io::read_matrix_csv(path3, sadiv::io::MatrixKind::kDistance),
      sadiv::InvalidInput);
}

TEST_CASE("distribution CSV and JSON round trips") {
  sadiv::CounterRng rng(7);
  std::vector<sadiv::Distribution> rows;
  for (int i = 0; i < 4; ++i) rows.push_back(sadiv::sample_uniform_simplex(6, rng));
  std::vector<std::string> ids;
  for (int i = 0; i < 6; ++i) ids.push_back("e" + std::to_string(i));

  const auto csv = temp_file("dists.csv");
  sadiv::io::write_distributions_csv(csv, ids, rows);
  const auto back = sadiv::io::read_distributions_csv(csv);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK((back[i].probs() - rows[i].probs()).cwiseAbs().maxCoeff() == 0.0);
  }

  const auto jsonp = temp_file("dists.json");
  sadiv::io::write_distributions_json(jsonp, rows);
  const auto jback = sadiv::io::read_distributions_json(jsonp);
  REQUIRE(jback.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK((jback[i].probs() - rows[i].probs()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("weighted distribution rows") {
  const auto path = temp_file("weighted.csv");
  write_text(path,
             "id,a,b,weight\n"
             "r0,0.25,0.75,2\n"
             "r1,0.5,0.5,6\n");
  const auto wr = sadiv::io::read_weighted_distributions_csv(path, "weight");
  CHECK(wr.weights[0] == doctest::Approx(0.25));
  CHECK(wr.weights[1] == doctest::Approx(0.75));
  CHECK(wr.distributions[0].probs()[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(sadiv::io::read_weighted_distributions_csv(path, "absent"),
                  sadiv::InvalidInput);
}

TEST_CASE("bundled Rutor tables load with the published shape") {
  const fs::path data_dir(SADIV_DATA_DIR);
  const auto ab = sadiv::io::read_matrix_csv(data_dir / "rutor_abundance.csv",
                                             sadiv::io::MatrixKind::kAbundance);
  CHECK(ab.values.rows() == 59);
  CHECK(ab.values.cols() == 45);
  CHECK(ab.values.minCoeff() >= 0.0);

  const auto traits = sadiv::io::read_matrix_csv(data_dir / "rutor_traits.csv",
                                                 sadiv::io::MatrixKind::kAbundance);
  CHECK(traits.values.rows() == 45);
  CHECK(traits.values.cols() == 6);
  CHECK(traits.row_ids == ab.column_names);
}

TEST_CASE("hierarchy files") {
  const auto paths = temp_file("paths.csv");
  write_text(paths,
             "element,l1,l2\n"
             "a,x,x1\n"
             "b,x,x2\n"
             "c,y,y1\n");
  const auto levels = temp_file("levels.json");
  write_text(levels, R"({"0": 0.1, "1": 0.5, "2": 1.0})");
  const auto h = sadiv::io::read_hierarchy(paths, levels);
  CHECK(h.levels() == 2);
  CHECK(h.paths.size() == 3);
  CHECK(h.level_similarity[1] == 0.5);
}

TEST_CASE("file digest is stable and content-sensitive") {
  const auto p1 = temp_file("digest1.txt");
  write_text(p1, "hello");
  const auto p2 = temp_file("digest2.txt");
  write_text(p2, "hello");
  const auto p3 = temp_file("digest3.txt");
  write_text(p3, "hellp");
  CHECK(sadiv::io::file_digest(p1) == sadiv::io::file_digest(p2));
  CHECK(sadiv::io::file_digest(p1) != sadiv::io::file_digest(p3));
  CHECK(sadiv::io::file_digest(p1).size() == 16);
}
