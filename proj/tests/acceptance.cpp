// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: acceptance [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <tuple>

#include "fuzzyirt/error.hpp"
#include "fuzzyirt/eval.hpp"
#include "fuzzyirt/fuzzy.hpp"
#include "fuzzyirt/io.hpp"
#include "fuzzyirt/irt_fit.hpp"
#include "fuzzyirt/pipeline.hpp"
#include "fuzzyirt/simgen.hpp"
#include "support.hpp"

using namespace fzirt;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240917;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  criterion %2d  %-34s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Cached AUC cells keyed by (M, I, J, beta0, null).
std::map<std::tuple<int, int, int, double, bool>, CellResult> cells;

const CellResult& cell(int m, int persons, int items, double beta0, int reps, bool null_effect = false) {
  const auto key = std::tuple{m, persons, items, beta0, null_effect};
  auto it = cells.find(key);
  if (it != cells.end()) return it->second;
  SimScenario s;
  s.categories = m;
  s.persons = persons;
  s.items = items;
  s.beta0 = beta0;
  s.replications = reps;
  s.seed = kSeed;
  s.zero_time_intensity = null_effect;
  EvalOptions opts;
  opts.threads = worker_threads();
  return cells.emplace(key, run_cell(s, opts)).first->second;
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  return (dx * dy).sum() / std::sqrt((dx * dx).sum() * (dy * dy).sum());
}

void criterion1() {
  std::mt19937_64 rng(kSeed + 1);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::uniform_int_distribution<int> cats(2, 8);
  double worst = 0.0, worst_sum = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto t = testsupport::random_tree(rng, cats(rng));
    std::vector<double> eta(t.nodes()), alpha(t.nodes());
    for (auto& v : eta) v = normal(rng);
    for (auto& v : alpha) v = normal(rng);
    const auto p = category_probabilities(t, eta, alpha);
    const auto oracle = testsupport::brute_force_probabilities(t, eta, alpha);
    double sum = 0.0;
    for (int m = 0; m < t.categories(); ++m) {
      worst = std::max(worst, std::abs(p[m] - oracle[m]));
      sum += p[m];
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
  }
  report(1, "tree probabilities vs enumeration", worst < 1e-12 && worst_sum < 1e-12,
         fmt("200 trees: max |p - oracle| = %.2e, max |sum - 1| = %.2e (tol 1e-12)", worst, worst_sum));
}

void criterion2() {
  std::mt19937_64 rng(kSeed + 2);
  std::uniform_int_distribution<int> persons(5, 30), items(2, 5);
  std::normal_distribution<double> normal;
  const TreeSpec trees[] = {builtin_tree(TreeKind::linear3), builtin_tree(TreeKind::nested5), linear_tree(2)};
  double worst = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const auto& tree = trees[rep % 3];
    const auto spec = make_model_spec(TraitStructure::common,
                                      rep % 2 ? ItemStructure::per_node : ItemStructure::common, tree.nodes());
    const auto ratings = testsupport::random_ratings(rng, persons(rng), items(rng), tree.categories(), 0.1);
    const auto e = expand(ratings, tree);
    const LikelihoodProblem lp(e, spec);
    Eigen::VectorXd alpha(lp.alpha_count());
    for (int k = 0; k < alpha.size(); ++k) alpha[k] = normal(rng);
    const double ll = lp.evaluate(alpha, Eigen::VectorXd::Zero(1), {}, false).loglik;
    worst = std::max(worst, std::abs(ll - testsupport::trapezoid_loglik(e, spec, alpha, 1.0)));
  }
  report(2, "likelihood vs dense grid", worst < 1e-6,
         fmt("10 datasets (I<=30, J<=5, sd 1, 15-node AGHQ): max |diff| = %.2e (tol 1e-6)", worst));
}

void criterion3() {
  const int reps = 20;
  std::vector<double> r(reps);
  int sigma_ok = 0, converged = 0;
  const auto tree = builtin_tree(TreeKind::linear3);
  const auto spec = make_model_spec(TraitStructure::common, ItemStructure::common, 2);
  FitOptions opts;
  opts.standard_errors = false;
  opts.threads = worker_threads();
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(kSeed + 300 + rep);
    std::normal_distribution<double> normal;
    Eigen::VectorXd alpha(15);
    for (int j = 0; j < 15; ++j) alpha[j] = normal(rng);
    const auto sim = simulate_irtree(tree, spec, alpha, Eigen::MatrixXd::Ones(1, 1), 500, 15, rng);
    const auto f = fit(expand(sim.ratings, tree), spec, opts);
    converged += f.converged();
    r[rep] = pearson(alpha, f.alpha);
    sigma_ok += std::abs(f.factor(0, 0) - 1.0) <= 0.15;
  }
  std::sort(r.begin(), r.end());
  const double median = 0.5 * (r[reps / 2 - 1] + r[reps / 2]);
  report(3, "parameter recovery", median >= 0.95 && sigma_ok >= 16,
         fmt("median r = %.4f (>= 0.95), |sd - 1| <= 0.15 in %d/20 (>= 16), converged %d/20", median, sigma_ok,
             converged));
}

void criterion4() {
  struct Target {
    int m, persons, items;
    double beta0, paper;
  };
  const Target targets[] = {{3, 150, 15, -20.5, 0.803}, {3, 150, 5, -10.5, 0.649}, {5, 500, 15, -20.5, 0.808}};
  bool ok = true;
  std::string detail = "B=100:";
  for (const auto& t : targets) {
    const auto& c = cell(t.m, t.persons, t.items, t.beta0, 100);
    const bool hit = std::abs(c.mean - t.paper) <= 0.03;
    ok = ok && hit && c.n_ok > 0;
    detail += fmt(" (M=%d,I=%d,J=%d,b0=%.1f) %.3f [sd %.3f, target %.3f+-0.03]%s;", t.m, t.persons, t.items,
                  t.beta0, c.mean, c.sd, t.paper, hit ? "" : " off");
  }
  report(4, "reference AUC cells", ok, detail);
}

void criterion5() {
  bool ok = true;
  std::string detail;
  double lowest = 1.0;
  for (int m : {3, 5}) {
    for (int j : {5, 15}) {
      const double strong = cell(m, 150, j, -20.5, 100).mean;
      const double weak = cell(m, 150, j, -10.5, 100).mean;
      ok = ok && strong > weak;
      lowest = std::min({lowest, strong, weak});
      detail += fmt(" M%d J%d: %.3f>%.3f", m, j, strong, weak);
    }
    for (double b0 : {-20.5, -10.5}) {
      const double many = cell(m, 150, 15, b0, 100).mean;
      const double few = cell(m, 150, 5, b0, 100).mean;
      ok = ok && many > few;
      detail += fmt(" M%d b0=%.1f: J15 %.3f>J5 %.3f", m, b0, many, few);
    }
  }
  ok = ok && lowest > 0.55;
  report(5, "directional claims", ok, fmt("I=150, B=100;%s; min cell %.3f (> 0.55)", detail.c_str(), lowest));
}

void criterion6() {
  const auto& c = cell(3, 500, 15, -20.5, 100, true);
  report(6, "null effect (beta = 0)", std::abs(c.mean - 0.5) <= 0.03 && c.n_ok > 0,
         fmt("M=3, I=500, J=15, B=100: AUC_avg = %.3f (sd %.3f), target 0.5+-0.03", c.mean, c.sd));
  const auto& small = cell(3, 150, 15, -20.5, 100, true);
  std::printf("info  null effect at I=150: AUC_avg = %.3f (in-sample fit direction bias, see README)\n", small.mean);
}

void criterion7() {
  const auto u = fuzzify(CategoryDistribution({1.0 / 3, 1.0 / 3, 1.0 / 3}));
  const bool exact = u.c_raw() == 2.0 && std::abs(u.v_raw() - 2.0 / 3.0) < 1e-15 && std::abs(u.s() - 1.5) < 1e-14;
  const auto half = BetaFuzzyNumber::from_mode_precision(2.0, 2.0, 3);
  const double card = cardinality(half);
  const double c_inf = centroid(BetaFuzzyNumber::from_mode_precision(1.0 + 2.0 * 0.3, 1e12, 3));
  const double c_zero = centroid(BetaFuzzyNumber::from_mode_precision(1.0 + 2.0 * 0.3, 0.0, 3));
  const bool ok = exact && std::abs(card - 2.0 / 3.0) < 1e-6 && std::abs(c_inf - 0.3) < 1e-9 &&
                  std::abs(c_zero - 0.5) < 1e-9;
  report(7, "fuzzifier closed forms", ok,
         fmt("uniform -> (%.15g, %.15g, %.15g); |card - 2/3| = %.1e; centroid(s=1e12) - c01 = %.1e; "
             "centroid(s=0) = %.15g",
             u.c_raw(), u.v_raw(), u.s(), std::abs(card - 2.0 / 3.0), c_inf - 0.3, c_zero));
}

void criterion8() {
  double worst = 0.0;
  for (double s : {0.5, 1.5, 4.0, 30.0, 1000.0}) {
    const auto t = to_triangular_moments01(BetaFuzzyNumber::from_mode_precision(2.0, s, 3));
    const double v01 = (1.0 / s) / 4.0;
    worst = std::max(worst, std::abs((t.y_u - t.y_l) - std::sqrt(3.5 * v01)));
  }
  // skewed input: M = 5, mode near the top, moderate precision
  const auto skewed = BetaFuzzyNumber::from_mode_precision(1.0 + 4.0 * 0.97, 2.0, 5);
  bool raised = false;
  try {
    to_triangular_moments(skewed);
  } catch (const Error& e) {
    raised = e.code() == ErrorCode::negative_discriminant;
  }
  report(8, "moment-matched triangle", worst < 1e-9 && raised,
         fmt("symmetric width error %.1e (tol 1e-9); M=5, c01=0.97, s=2 -> NegativeDiscriminant %s", worst,
             raised ? "raised" : "NOT raised"));
}

void criterion9() {
  std::mt19937_64 rng(kSeed + 9);
  std::uniform_int_distribution<int> coarse(0, 5);
  std::bernoulli_distribution coin(0.5);
  int exact = 0, with_ties = 0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> s(20);
    std::vector<std::uint8_t> y(20);
    for (int i = 0; i < 20; ++i) {
      s[i] = coarse(rng) * 0.2;
      y[i] = coin(rng);
    }
    y[0] = 1;
    y[1] = 0;
    double num = 0.0, pairs = 0.0;
    bool tie = false;
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j)
        if (y[i] && !y[j]) {
          pairs += 1.0;
          num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
          tie = tie || s[i] == s[j];
        }
    exact += auc(s, y) == num / pairs;
    with_ties += tie;
  }
  report(9, "AUC vs pair enumeration", exact == 50 && with_ties > 0,
         fmt("%d/50 exact matches, %d inputs with tied pairs", exact, with_ties));
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files[fs::relative(entry.path(), root).string()] = read_text_file(entry.path());
  return files;
}

void run_pipeline(const fs::path& out) {
  fs::remove_all(out);
  const std::string dir = out.string();
  auto config = [&](json j) { return config_from_json(j); };
  cmd_simulate(config({{"paths", {{"out", dir + "/sim"}}},
                       {"scenario", {{"I", 150}, {"J", 15}, {"M", 3}, {"beta0", -20.5}, {"B", 2}, {"seed", kSeed}}}}));
  const json fit_paths = {{"out", dir + "/fit"}, {"data", dir + "/sim/rep_1/Y.csv"}, {"tree", "builtin:linear3"}};
  cmd_fit(config({{"paths", fit_paths}}));
  cmd_fuzzify(config({{"paths", fit_paths}, {"fuzzify", {{"curves", true}}}}));
  cmd_summarize(config({{"paths", fit_paths}}));
  cmd_evaluate(config({{"paths", {{"out", dir + "/eval"}}},
                       {"seed", kSeed},
                       {"evaluate",
                        {{"reps", 3},
                         {"threads", worker_threads()},
                         {"scenarios", {{{"I", 150}, {"J", 5}, {"M", 3}, {"beta0", -10.5}}}}}}}));
}

void criterion10(const fs::path& work) {
  run_pipeline(work / "run_a");
  run_pipeline(work / "run_b");
  const auto a = snapshot(work / "run_a");
  const auto b = snapshot(work / "run_b");
  size_t bytes = 0;
  for (const auto& [name, text] : a) bytes += text.size();
  report(10, "pipeline determinism", a == b && a.size() >= 10,
         fmt("%zu files, %zu bytes, reruns %s", a.size(), bytes, a == b ? "byte-identical" : "DIFFER"));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "fuzzyirt_acceptance";
  fs::create_directories(work);
  const auto start = std::chrono::steady_clock::now();
  const std::function<void()> steps[] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                         criterion6, criterion7, criterion8, criterion9,
                                         [&] { criterion10(work); }};
  int id = 1;
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      report(id, "(exception)", false, e.what());
    }
    ++id;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d criterion(s) failed; %.0f s\n", failures, secs);
  return failures ? 1 : 0;
}
