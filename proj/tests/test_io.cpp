#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "fuzzyirt/error.hpp"
#include "fuzzyirt/io.hpp"
#include "fuzzyirt/pipeline.hpp"
#include "support.hpp"

using namespace fzirt;
using testsupport::code_of;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
  auto rows = parse_csv(csv);
  if (!rows.empty() && rows.back().size() == 1 && rows.back()[0].empty()) rows.pop_back();
  return rows;
}

size_t column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  REQUIRE(it != header.end());
  return static_cast<size_t>(it - header.begin());
}

std::string fuzzy_header() {
  return "person,item,observed,shape,c_raw,v_raw,s,c01,a,b,y_l,y_u,tri_source,cardinality,centroid,support_length\n";
}

std::string fuzzy_row(const std::string& person, double c, double s, double card, double cent, double supp) {
  return person + ",i,1,beta," + format_number(c) + ",0," + format_number(s) + ",0,1,1,NA,NA,NA," +
         format_number(card) + "," + format_number(cent) + "," + format_number(supp) + "\n";
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(1e6) == "1000000");
  CHECK(format_number(std::nan("")) == "NA");
  CHECK(format_number(INFINITY) == "NA");
  CHECK(json_number(std::nan("")).is_null());
  CHECK(json_number(1.0 / 3.0).get<double>() == 0.333333333333);
}

TEST_CASE("CSV parsing") {
  const auto rows = parse_csv("a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\n2,,\"line\nbreak\"\n");
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"1", "x,y", "he said \"hi\""});
  CHECK(rows[2] == std::vector<std::string>{"2", "", "line\nbreak"});
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("q\"") == "\"q\"\"\"");
  for (const std::string s : {"x", "a,b", "\"", "multi\nline", ""}) {
    const auto back = rows_of("k," + csv_field(s) + "\n");
    REQUIRE(back.size() == 1);
    CHECK(back[0] == std::vector<std::string>{"k", s});
  }
}

TEST_CASE("ratings CSV") {
  const auto d = parse_ratings_csv("id,q1,q2\np1,1,3\np2,,2\n", "mem");
  CHECK(d.person_ids == std::vector<std::string>{"p1", "p2"});
  CHECK(d.item_names == std::vector<std::string>{"q1", "q2"});
  CHECK(d.ratings.at(0, 1) == 3);
  CHECK(d.ratings.at(1, 0) == RatingMatrix::kMissing);
  CHECK(parse_ratings_csv(ratings_to_csv(d), "again").ratings == d.ratings);
  CHECK(ratings_to_csv(d) == "person,q1,q2\np1,1,3\np2,,2\n");

  CHECK(code_of([] { parse_ratings_csv("id,q1\np1,1,2\n", "x"); }) == ErrorCode::schema);
  CHECK(code_of([] { parse_ratings_csv("id,q1\np1,1.5\n", "x"); }) == ErrorCode::schema);
  CHECK(code_of([] { parse_ratings_csv("id,q1\np1,abc\n", "x"); }) == ErrorCode::schema);
  CHECK(code_of([] { parse_ratings_csv("id,q1\np1,0\n", "x"); }) == ErrorCode::out_of_range_category);
  CHECK(code_of([] { parse_ratings_csv("", "x"); }) == ErrorCode::empty_input);
  CHECK(code_of([] { read_ratings_csv("/nonexistent/ratings.csv"); }) == ErrorCode::io);

  const auto five = parse_ratings_csv("id,q1\np1,5\n", "x");
  CHECK(code_of([&] { check_ratings_against_tree(five, builtin_tree(TreeKind::linear3)); }) == ErrorCode::schema);
  CHECK_NOTHROW(check_ratings_against_tree(five, builtin_tree(TreeKind::nested5)));
}

TEST_CASE("tree JSON") {
  for (auto kind : {TreeKind::linear3, TreeKind::nested5, TreeKind::six_schema1, TreeKind::six_schema2}) {
    const auto t = builtin_tree(kind);
    CHECK(tree_from_json(tree_to_json(t)) == t);
  }
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto t = testsupport::random_tree(rng, 2 + rep % 6);
    CHECK(tree_from_json(json::parse(tree_to_json(t).dump())) == t);
  }
  CHECK(load_tree("builtin:nested5") == builtin_tree(TreeKind::nested5));
  CHECK(load_tree("builtin:linear4") == linear_tree(4));
  CHECK(code_of([] { load_tree("builtin:oak"); }) != ErrorCode::ok);

  const auto ragged = json::parse(R"({"M": 3, "N": 2, "map": [[0, null], [1, 0, 1], [1, 1]]})");
  CHECK(code_of([&] { tree_from_json(ragged); }) == ErrorCode::schema);
  const auto bad = json::parse(R"({"M": 3, "N": 2, "map": [[0, null], [1, 0.5], [1, 1]]})");
  CHECK(code_of([&] { tree_from_json(bad); }) == ErrorCode::bad_entry);
  const auto dup = json::parse(R"({"M": 2, "N": 1, "map": [[1], [1]]})");
  CHECK(code_of([&] { tree_from_json(dup); }) == ErrorCode::duplicate_path);
}

TEST_CASE("model and scenario JSON") {
  const auto m = make_model_spec(TraitStructure::per_node_correlated, ItemStructure::per_node, 4, {0, 1, 1, 2});
  const auto back = model_from_json(model_to_json(m), 4);
  CHECK(back.traits == m.traits);
  CHECK(back.items == m.items);
  CHECK(back.node_to_dimension == m.node_to_dimension);
  CHECK(code_of([] { model_from_json(json::parse(R"({"traits": "bogus"})"), 2); }) == ErrorCode::schema);

  SimScenario s;
  s.persons = 50;
  s.items = 5;
  s.categories = 5;
  s.beta0 = -10.5;
  s.replications = 7;
  s.seed = 123456789012345ULL;
  const auto t = scenario_from_json(scenario_to_json(s));
  CHECK(t.persons == 50);
  CHECK(t.items == 5);
  CHECK(t.categories == 5);
  CHECK(t.beta0 == -10.5);
  CHECK(t.replications == 7);
  CHECK(t.seed == s.seed);
  CHECK(code_of([] { scenario_from_json(json::parse(R"({"I": 0, "J": 5, "M": 3, "beta0": -1, "B": 1})")); }) ==
        ErrorCode::invalid_argument);
}

TEST_CASE("configuration is strict") {
  CHECK_NOTHROW(config_from_json(json::parse(R"({"paths": {"out": "x"}, "fuzzify": {"shape": "tri-moment"}})")));
  CHECK(code_of([] { config_from_json(json::parse(R"({"pathz": {}})")); }) == ErrorCode::schema);
  CHECK(code_of([] { config_from_json(json::parse(R"({"paths": {"dta": "x"}})")); }) == ErrorCode::schema);
  CHECK(code_of([] { config_from_json(json::parse(R"({"fuzzify": {"shape": "circle"}})")); }) == ErrorCode::schema);
  CHECK(code_of([] { config_from_json(json::parse(R"({"fuzzify": {"tau": 1.5}})")); }) == ErrorCode::schema);
  CHECK(code_of([] { config_from_json(json::parse(R"({"fit": {"quad_nodes": 0}})")); }) == ErrorCode::schema);
  const auto cfg = config_from_json(json::parse(R"({"seed": 9, "evaluate": {"reps": 4}, "fit": {"quad_nodes": 21}})"));
  CHECK(*cfg.seed == 9);
  CHECK(cfg.evaluate.reps == 4);
  CHECK(cfg.fit.quad_nodes == 21);
}

TEST_CASE("type-7 quantiles") {
  std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  CHECK(quantile7(x, 0.25) == doctest::Approx(3.25));
  CHECK(quantile7(x, 0.5) == doctest::Approx(5.5));
  CHECK(quantile7(x, 0.75) == doctest::Approx(7.75));
  CHECK(quantile7(x, 0.0) == 1.0);
  CHECK(quantile7(x, 1.0) == 10.0);
  CHECK(quantile7({4.0}, 0.3) == 4.0);

  // n = 4k + 1: the quartiles are order statistics
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal;
  for (int k = 1; k < 20; ++k) {
    std::vector<double> v(4 * k + 1);
    for (auto& e : v) e = normal(rng);
    std::sort(v.begin(), v.end());
    CHECK(quantile7(v, 0.25) == v[k]);
    CHECK(quantile7(v, 0.5) == v[2 * k]);
    CHECK(quantile7(v, 0.75) == v[3 * k]);
  }
}

TEST_CASE("summary table") {
  SUBCASE("single row equals that row") {
    const auto out = rows_of(summary_table(fuzzy_header() + fuzzy_row("p1", 2.5, 4.0, 0.5, 0.6, 0.9), "t"));
    const auto& h = out[0];
    for (size_t r = 1; r < out.size(); ++r) {
      if (out[r][column(h, "statistic")] == "sd") {
        CHECK(out[r][column(h, "mode")] == "0");
        continue;
      }
      CHECK(out[r][column(h, "mode")] == "2.5");
      CHECK(out[r][column(h, "precision")] == "4");
      CHECK(out[r][column(h, "cardinality")] == "0.5");
      CHECK(out[r][column(h, "centroid")] == "0.6");
      CHECK(out[r][column(h, "support_length")] == "0.9");
    }
  }
  SUBCASE("identical rows have zero spread") {
    std::string csv = fuzzy_header();
    for (int k = 0; k < 6; ++k) csv += fuzzy_row("p" + std::to_string(k % 2), 1.7, 3.0, 0.4, 0.3, 0.8);
    const auto out = rows_of(summary_table(csv, "t"));
    const auto& h = out[0];
    int person_rows = 0;
    for (size_t r = 1; r < out.size(); ++r) {
      const auto& stat = out[r][column(h, "statistic")];
      person_rows += out[r][0] == "person";
      CHECK(out[r][column(h, "mode")] == (stat == "sd" ? "0" : "1.7"));
    }
    CHECK(person_rows == 2);
  }
  SUBCASE("quartiles against a sorting oracle") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unif(1.0, 3.0);
    std::string csv = fuzzy_header();
    std::vector<double> modes;
    for (int k = 0; k < 9; ++k) {
      modes.push_back(std::round(unif(rng) * 1000.0) / 1000.0);
      csv += fuzzy_row("p" + std::to_string(k), modes.back(), 1.0, 0.5, 0.5, 0.5);
    }
    std::sort(modes.begin(), modes.end());
    const auto out = rows_of(summary_table(csv, "t"));
    const auto& h = out[0];
    for (size_t r = 1; r < out.size(); ++r) {
      if (out[r][0] != "overall") continue;
      const auto& stat = out[r][column(h, "statistic")];
      const auto& value = out[r][column(h, "mode")];
      CHECK(out[r][column(h, "n")] == "9");
      if (stat == "min") CHECK(value == format_number(modes[0]));
      if (stat == "q1") CHECK(value == format_number(modes[2]));
      if (stat == "median") CHECK(value == format_number(modes[4]));
      if (stat == "q3") CHECK(value == format_number(modes[6]));
      if (stat == "max") CHECK(value == format_number(modes[8]));
    }
  }
  CHECK(code_of([] { summary_table("", "t"); }) == ErrorCode::empty_input);
  CHECK(code_of([] { summary_table(fuzzy_header(), "t"); }) == ErrorCode::empty_input);
  CHECK(code_of([] { summary_table("person,item\np,i\n", "t"); }) == ErrorCode::schema);
}

TEST_CASE("fuzzy table: degenerate cell and shared mode") {
  StoredFit stored;
  stored.categories = 3;
  stored.person_ids = {"a", "b"};
  stored.item_names = {"x", "y"};
  auto& f = stored.fit;
  f.model = make_model_spec(TraitStructure::common, ItemStructure::common, 2);
  f.persons = 2;
  f.items = 2;
  f.alpha = Eigen::Vector2d(40.0, 0.0);
  f.eta = Eigen::MatrixXd::Zero(2, 1);
  RatingsData data{stored.person_ids, stored.item_names, RatingMatrix(2, 2)};
  data.ratings.at(0, 0) = 3;
  data.ratings.at(0, 1) = 2;
  data.ratings.at(1, 1) = 1;
  const auto tree = builtin_tree(TreeKind::linear3);

  PipelineConfig::Fuzzify opts;
  std::string curves;
  const auto beta_rows = rows_of(fuzzy_table(stored, tree, data, opts, &curves));
  REQUIRE(beta_rows.size() == 4);  // header + three observed cells
  const auto& h = beta_rows[0];
  CHECK(beta_rows[1][column(h, "s")] == "1000000");
  CHECK(beta_rows[1][column(h, "c_raw")] == "3");
  CHECK(rows_of(curves).size() == 1 + 3 * 201);

  opts.shape = FuzzyShape::tri_moment;
  const auto tri_rows = rows_of(fuzzy_table(stored, tree, data, opts, nullptr));
  REQUIRE(tri_rows.size() == beta_rows.size());
  for (size_t r = 1; r < tri_rows.size(); ++r) {
    CHECK(tri_rows[r][column(h, "c_raw")] == beta_rows[r][column(h, "c_raw")]);
    CHECK(tri_rows[r][column(h, "y_l")] != "NA");
  }
  RatingsData other = data;
  other.person_ids = {"a", "c"};
  CHECK(code_of([&] { fuzzy_table(stored, tree, other, opts, nullptr); }) == ErrorCode::schema);
  CHECK(code_of([&] { fuzzy_table(stored, builtin_tree(TreeKind::nested5), data, opts, nullptr); }) ==
        ErrorCode::schema);
}

TEST_CASE("pipeline: simulate, fit, fuzzify, summarize") {
  const auto dir = testsupport::temp_dir("pipeline");
  json cfg = {{"paths", {{"out", dir.string()}}},
              {"scenario", {{"I", 80}, {"J", 15}, {"M", 5}, {"beta0", -20.5}, {"B", 2}, {"seed", 4}}}};
  cmd_simulate(config_from_json(cfg));
  CHECK(fs::exists(dir / "rep_1" / "Y.csv"));
  CHECK(fs::exists(dir / "rep_2" / "R.csv"));
  CHECK(fs::exists(dir / "rep_2" / "truth.json"));
  CHECK_FALSE(fs::exists(dir / "rep_3"));
  const auto y = read_ratings_csv(dir / "rep_1" / "Y.csv");
  CHECK(y.ratings.items == 15);
  for (int v : y.ratings.values) {
    CHECK(v >= 1);
    CHECK(v <= 5);
  }

  // mismatched M: five-category data against a three-category tree
  json fit_cfg = {{"paths", {{"out", dir.string()}, {"data", (dir / "rep_1" / "Y.csv").string()},
                             {"tree", "builtin:linear3"}}},
                  {"fit", {{"standard_errors", false}}}};
  CHECK(code_of([&] { cmd_fit(config_from_json(fit_cfg)); }) == ErrorCode::schema);

  fit_cfg["paths"]["tree"] = "builtin:linear5";
  cmd_fit(config_from_json(fit_cfg));
  const auto first = read_text_file(dir / "fit.json");
  cmd_fit(config_from_json(fit_cfg));
  CHECK(read_text_file(dir / "fit.json") == first);
  const auto stored = fit_from_json(json::parse(first));
  CHECK(stored.categories == 5);
  CHECK(stored.fit.alpha.size() == 15);
  CHECK(stored.person_ids == y.person_ids);

  cmd_fuzzify(config_from_json(fit_cfg));
  const auto fuzzy = rows_of(read_text_file(dir / "fuzzy.csv"));
  size_t observed = 0;
  for (int v : y.ratings.values) observed += v != 0;
  CHECK(fuzzy.size() == observed + 1);

  cmd_summarize(config_from_json(fit_cfg));
  const auto summary = rows_of(read_text_file(dir / "summary.csv"));
  CHECK(summary.size() == 1 + 80 + 7);

  json missing = {{"paths", {{"out", (dir / "nowhere").string()}}}};
  CHECK(code_of([&] { cmd_summarize(config_from_json(missing)); }) == ErrorCode::io);
}

TEST_CASE("pipeline: evaluate needs a seed and writes the tables") {
  const auto dir = testsupport::temp_dir("evaluate");
  json cfg = {{"paths", {{"out", dir.string()}}},
              {"evaluate", {{"reps", 2}, {"scenarios", {{{"I", 50}, {"J", 5}, {"M", 3}, {"beta0", -20.5}}}}}}};
  CHECK(code_of([&] { cmd_evaluate(config_from_json(cfg)); }) == ErrorCode::invalid_argument);
  cfg["seed"] = 1;
  cmd_evaluate(config_from_json(cfg));
  const auto table = rows_of(read_text_file(dir / "auc_table.csv"));
  CHECK(table.size() >= 2);
  const auto long_rows = rows_of(read_text_file(dir / "auc_long.csv"));
  CHECK(long_rows.size() == 2);
  const auto items = rows_of(read_text_file(dir / "auc_items.csv"));
  CHECK(items.size() == 1 + 5);
  CHECK(fs::exists(dir / "evaluate.log"));
}
