#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "distrep/cohort.hpp"
#include "distrep/ingest.hpp"

using namespace distrep;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() / "distrep_ingest_test";
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("epoch window is half-open [08:00, 20:00)", "[ingest]") {
  TempDir tmp;
  write_file(tmp.file("e.csv"),
             "subject_id,timestamp,count\n"
             "a,2024-01-01 07:59,10\n"
             "a,2024-01-01 08:00,11\n"
             "a,2024-01-01 19:59,12\n"
             "a,2024-01-01 20:00,13\n");
  const auto epochs = load_epochs(tmp.file("e.csv"));
  REQUIRE(epochs.at("a") == std::vector<double>{11.0, 12.0});

  SECTION("T separator and seconds are tolerated") {
    write_file(tmp.file("t.csv"),
               "subject_id,timestamp,count\n"
               "a,2024-01-01T09:30:45,7\n");
    REQUIRE(load_epochs(tmp.file("t.csv")).at("a") == std::vector<double>{7.0});
  }
}

TEST_CASE("two full-window days yield 1440 epochs", "[ingest]") {
  TempDir tmp;
  std::ostringstream body;
  body << "subject_id,timestamp,count\n";
  for (int day = 1; day <= 2; ++day)
    for (int minute = 0; minute < 1440; ++minute) {
      char ts[32];
      std::snprintf(ts, sizeof(ts), "2024-01-%02d %02d:%02d", day, minute / 60, minute % 60);
      body << "a," << ts << ",1\n";
    }
  write_file(tmp.file("full.csv"), body.str());
  REQUIRE(load_epochs(tmp.file("full.csv")).at("a").size() == 1440);
}

TEST_CASE("interleaved subjects group like a sort-then-split oracle", "[ingest]") {
  TempDir tmp;
  write_file(tmp.file("mix.csv"),
             "subject_id,timestamp,count\n"
             "b,2024-01-01 09:00,1\n"
             "a,2024-01-01 09:00,2\n"
             "b,2024-01-01 09:01,3\n"
             "c,2024-01-01 09:00,4\n"
             "a,2024-01-01 09:01,5\n");
  const auto epochs = load_epochs(tmp.file("mix.csv"));
  REQUIRE(epochs.size() == 3);
  REQUIRE(epochs.at("a") == std::vector<double>{2.0, 5.0});
  REQUIRE(epochs.at("b") == std::vector<double>{1.0, 3.0});
  REQUIRE(epochs.at("c") == std::vector<double>{4.0});
  // map iterates sorted, matching the oracle's sorted grouping
  std::vector<std::string> order;
  for (const auto& [id, v] : epochs) order.push_back(id);
  REQUIRE(std::is_sorted(order.begin(), order.end()));
}

TEST_CASE("malformed epoch rows carry line numbers", "[ingest]") {
  TempDir tmp;
  SECTION("bad timestamp") {
    write_file(tmp.file("bad.csv"),
               "subject_id,timestamp,count\na,2024-01-01 09:00,1\na,yesterday,2\n");
    REQUIRE_THROWS_WITH(load_epochs(tmp.file("bad.csv")), Catch::Contains("line 3"));
  }
  SECTION("negative count") {
    write_file(tmp.file("neg.csv"), "subject_id,timestamp,count\na,2024-01-01 09:00,-4\n");
    REQUIRE_THROWS_WITH(load_epochs(tmp.file("neg.csv")), Catch::Contains("negative"));
  }
  SECTION("wrong column count") {
    write_file(tmp.file("cols.csv"), "subject_id,timestamp,count\na,2024-01-01 09:00\n");
    REQUIRE_THROWS_WITH(load_epochs(tmp.file("cols.csv")), Catch::Contains("line 2"));
  }
  SECTION("wrong header") {
    write_file(tmp.file("hdr.csv"), "id,when,value\na,2024-01-01 09:00,1\n");
    REQUIRE_THROWS_AS(load_epochs(tmp.file("hdr.csv")), data_error);
  }
}

TEST_CASE("log1 transform", "[ingest]") {
  REQUIRE(apply_log1({0.0}) == std::vector<double>{0.0});
  REQUIRE(apply_log1({std::exp(1.0) - 1.0})[0] == Approx(1.0));
  const auto v = apply_log1({0.0, 9.0, 99.0});
  REQUIRE(v[0] == 0.0);
  REQUIRE(v[1] == Approx(std::log(10.0)));
  REQUIRE(v[2] == Approx(std::log(100.0)));
  REQUIRE_THROWS_AS(apply_log1({-1.0}), data_error);

  SECTION("monotone: order statistics permute identically") {
    const std::vector<double> raw{5.0, 0.0, 22.0, 3.0, 3.0, 100.0};
    auto raw_sorted = raw;
    std::sort(raw_sorted.begin(), raw_sorted.end());
    auto tr_sorted = apply_log1(raw);
    std::sort(tr_sorted.begin(), tr_sorted.end());
    REQUIRE(apply_log1(raw_sorted) == tr_sorted);
  }
}

TEST_CASE("outcome join applies the EDSS threshold", "[ingest]") {
  TempDir tmp;
  std::ostringstream body;
  body << "subject_id,timestamp,count\n";
  for (const char* id : {"low", "high", "orphan", "thin"})
    for (int minute = 0; minute < 70; ++minute) {
      char ts[32];
      std::snprintf(ts, sizeof(ts), "2024-01-01 %02d:%02d", 9 + minute / 60, minute % 60);
      body << id << "," << ts << ",5\n";
    }
  body << "thin2,2024-01-01 09:00,4\n";
  write_file(tmp.file("e.csv"), body.str());
  write_file(tmp.file("o.csv"), "subject_id,edss\nlow,3.5\nhigh,4.0\nthin2,2.0\nextra,1.0\n");

  const auto epochs = load_epochs(tmp.file("e.csv"));
  const auto outcomes = load_outcomes(tmp.file("o.csv"));
  std::ostringstream warnings;
  const auto cohort = join_outcomes(epochs, outcomes, 60, &warnings);

  REQUIRE(cohort.size() == 2);  // orphan has no outcome, thin2 has too few epochs
  for (const auto& s : cohort) {
    if (s.subject_id == "low") {
      REQUIRE(*s.outcome_binary == 0);
      REQUIRE(*s.outcome_continuous == 3.5);
    } else {
      REQUIRE(s.subject_id == "high");
      REQUIRE(*s.outcome_binary == 1);
      REQUIRE(*s.outcome_continuous == 4.0);
    }
  }
  REQUIRE(warnings.str().find("orphan") != std::string::npos);
  REQUIRE(warnings.str().find("thin2") != std::string::npos);

  SECTION("duplicate outcome id is an error") {
    write_file(tmp.file("dup.csv"), "subject_id,edss\nlow,3.5\nlow,4.0\n");
    REQUIRE_THROWS_WITH(load_outcomes(tmp.file("dup.csv")), Catch::Contains("duplicate"));
  }

  SECTION("off-grid EDSS is rejected") {
    write_file(tmp.file("grid.csv"), "subject_id,edss\nlow,3.7\n");
    REQUIRE_THROWS_AS(load_outcomes(tmp.file("grid.csv")), data_error);
  }

  SECTION("empty join is an error") {
    write_file(tmp.file("none.csv"), "subject_id,edss\nnobody,2.0\n");
    REQUIRE_THROWS_AS(join_outcomes(epochs, load_outcomes(tmp.file("none.csv")), 60, nullptr),
                      data_error);
  }
}

TEST_CASE("synthetic cohorts round-trip through the epochs format", "[ingest]") {
  TempDir tmp;
  CohortDesign design;
  design.group0 = {3, hazard_shape_params(HazardShape::Constant)};
  design.group1 = {3, hazard_shape_params(HazardShape::Decreasing)};
  design.epochs_per_subject = 720;
  const auto cohort = simulate_cohort(design, 99);

  write_epochs_csv(tmp.file("rt.csv"), cohort);
  const auto loaded = load_epochs(tmp.file("rt.csv"));
  REQUIRE(loaded.size() == cohort.size());
  for (const auto& s : cohort) REQUIRE(loaded.at(s.subject_id) == s.values);

  SECTION("subject-value cache matches too") {
    write_subject_values_csv(tmp.file("cache.csv"), cohort);
    std::ifstream in(tmp.file("cache.csv"));
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "subject_id,value");
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    REQUIRE(rows == cohort.size() * 720);
  }
}

TEST_CASE("curve export writes one row per grid point", "[ingest]") {
  TempDir tmp;
  Curve c{RepresentationKind::Quantile, CurveDomain::QuantileLevel, {0.1, 0.5, 0.9}, {1.0, 2.0, 3.0}};
  write_curves_csv(tmp.file("c.csv"), {"s1"}, {c});
  std::ifstream in(tmp.file("c.csv"));
  std::string line;
  std::getline(in, line);
  REQUIRE(line == "subject_id,kind,domain,grid,value");
  std::getline(in, line);
  REQUIRE(line == "s1,quantile,quantile_level,0.1,1");
}
