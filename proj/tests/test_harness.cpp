#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pobandit/emit.hpp"
#include "pobandit/errors.hpp"
#include "pobandit/harness.hpp"

using namespace pobandit;

namespace {

ScenarioSpec toy(std::size_t runs = 1) {
  ScenarioSpec s;
  s.name = "toy";
  s.d_x = 4;
  s.d_y = 3;
  s.num_arms = 3;
  s.horizon = 300;
  s.runs = runs;
  s.checkpoint_every = 50;
  s.margin_samples = 2000;
  s.base_seed = 99;
  s.workers = 1;
  return s;
}

void check_identical(const RunTrace& a, const RunTrace& b) {
  CHECK(a.gaps == b.gaps);
  CHECK(a.chosen == b.chosen);
  CHECK(a.optimal == b.optimal);
  CHECK(a.cumulative_regret == b.cumulative_regret);
  REQUIRE(a.checkpoints.size() == b.checkpoints.size());
  for (std::size_t k = 0; k < a.checkpoints.size(); ++k) {
    CHECK(a.checkpoints[k].pulls == b.checkpoints[k].pulls);
    CHECK(a.checkpoints[k].est_error == b.checkpoints[k].est_error);
    CHECK(a.checkpoints[k].min_eig == b.checkpoints[k].min_eig);
  }
  CHECK(a.p_hat == b.p_hat);
}

// Minimal XML well-formedness: balanced tags, quoted attributes, escaped text.
bool well_formed_xml(const std::string& doc) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  bool seen_root = false;
  while (i < doc.size()) {
    if (doc[i] == '&') {
      const auto semi = doc.find(';', i);
      if (semi == std::string::npos) return false;
      const std::string ent = doc.substr(i, semi - i + 1);
      if (ent != "&amp;" && ent != "&lt;" && ent != "&gt;" && ent != "&quot;" && ent != "&apos;") return false;
      i = semi + 1;
      continue;
    }
    if (doc[i] != '<') {
      if (doc[i] == '>') return false;
      if (stack.empty() && seen_root && !std::isspace(static_cast<unsigned char>(doc[i]))) return false;
      ++i;
      continue;
    }
    const auto close = doc.find('>', i);
    if (close == std::string::npos) return false;
    std::string tag = doc.substr(i + 1, close - i - 1);
    i = close + 1;
    if (tag.rfind("?xml", 0) == 0 || tag.rfind("!--", 0) == 0) continue;
    if (tag.find('<') != std::string::npos) return false;
    if (!tag.empty() && tag[0] == '/') {
      if (stack.empty() || stack.back() != tag.substr(1)) return false;
      stack.pop_back();
      continue;
    }
    const bool self_closing = !tag.empty() && tag.back() == '/';
    if (self_closing) tag.pop_back();
    const std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
    if (name.empty()) return false;
    // Attribute values must be quoted: every '=' is followed by '"'.
    for (std::size_t p = tag.find('='); p != std::string::npos; p = tag.find('=', tag.find('"', p + 2) + 1)) {
      if (p + 1 >= tag.size() || tag[p + 1] != '"') return false;
      if (tag.find('"', p + 2) == std::string::npos) return false;
    }
    if (stack.empty() && seen_root) return false;
    seen_root = true;
    if (!self_closing) stack.push_back(name);
  }
  return seen_root && stack.empty();
}

}  // namespace

TEST_CASE("oracle policy has zero regret") {
  ScenarioSpec s = toy();
  s.policies = {"oracle"};
  const RunTrace tr = run_single(s, "oracle", 0);
  for (double g : tr.gaps) CHECK(g == 0.0);
  CHECK(tr.regret(s.horizon) == 0.0);
}

TEST_CASE("single round") {
  ScenarioSpec s = toy();
  s.horizon = 1;
  const RunTrace tr = run_single(s, "ts", 0);
  CHECK(tr.horizon() == 1);
  REQUIRE(tr.checkpoints.size() == 1);
  std::size_t total = 0;
  for (auto n : tr.checkpoints[0].pulls) total += n;
  CHECK(total == 1);
}

TEST_CASE("trace invariants") {
  for (const char* policy : {"ts", "greedy", "random", "oracle"}) {
    const RunTrace tr = run_single(toy(), policy, 2);
    double sum = 0.0;
    for (std::size_t t = 1; t <= tr.horizon(); ++t) {
      CHECK(tr.gaps[t - 1] >= 0.0);
      sum += tr.gaps[t - 1];
      if (t > 1) CHECK(tr.regret(t) >= tr.regret(t - 1));
    }
    CHECK(tr.regret(tr.horizon()) == sum);
    for (const Checkpoint& c : tr.checkpoints) {
      std::size_t total = 0;
      for (auto n : c.pulls) total += n;
      CHECK(total == c.t);
    }
  }
}

TEST_CASE("runs are deterministic and isolated") {
  const ScenarioSpec s = toy(3);
  check_identical(run_single(s, "ts", 1), run_single(s, "ts", 1));

  ScenarioSpec more = toy(6);
  more.policies = {"greedy", "ts"};
  const ExperimentReport small = run_experiment(s);
  const ExperimentReport big = run_experiment(more);
  for (std::size_t k = 0; k < 3; ++k) check_identical(small.traces[0][k], big.traces[1][k]);

  CHECK(run_single(s, "ts", 0).gaps != run_single(s, "ts", 1).gaps);

  ScenarioSpec k10 = toy(10), k50 = toy(50);
  k10.horizon = k50.horizon = 100;
  const ExperimentReport r10 = run_experiment(k10), r50 = run_experiment(k50);
  for (std::size_t k = 0; k < 10; ++k) check_identical(r10.traces[0][k], r50.traces[0][k]);
}

TEST_CASE("policies never see latent contexts") {
  ScenarioSpec s = toy();
  const Environment env = scenario_for_run(s, 0);
  RandomStream rng(1);
  Round clean = sample_round(env, 1, rng);
  Round poisoned = clean;
  for (Vector& x : poisoned.x)
    for (double& v : x) v = std::nan("");
  ThompsonPolicy a(3, 3, 1.0), b(3, 3, 1.0);
  for (int k = 0; k < 20; ++k) {
    RandomStream r1(k), r2(k);
    const PolicyDecision da = a.decide(PolicyView(clean), r1);
    const PolicyDecision db = b.decide(PolicyView(poisoned), r2);
    CHECK(da.chosen == db.chosen);
    for (double v : db.scores) CHECK(std::isfinite(v));
  }
}

TEST_CASE("experiment report structure") {
  const ExperimentReport one = run_experiment(toy(1));
  const SeriesCurve* r1 = one.find("ts", "regret");
  REQUIRE(r1);
  CHECK(r1->curves.mean == r1->curves.worst);

  const ExperimentReport four = run_experiment(toy(4));
  CHECK(four.seeds.size() == 4);
  CHECK(four.traces[0].size() == 4);
  const SeriesCurve* r4 = four.find("ts", "regret");
  REQUIRE(r4);
  CHECK(r4->curves.t.size() == four.grid.size());
  CHECK(r4->curves.runs == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(four.seeds[k] == run_seed(99, k));
  CHECK(four.find("ts", "err_norm_arm_1"));
  CHECK(four.find("ts", "eig_ratio_arm_3"));
  CHECK(four.find("ts", "n_arm_2"));
  REQUIRE(four.theorems.size() == 1);
  CHECK(four.theorems[0].arm_count_pairs > 0);
}

TEST_CASE("doubling the run count never lowers the worst case") {
  for (std::size_t k : {2, 4}) {
    const ExperimentReport small = run_experiment(toy(k));
    const ExperimentReport big = run_experiment(toy(2 * k));
    const auto& a = small.find("ts", "regret")->curves;
    const auto& b = big.find("ts", "regret")->curves;
    REQUIRE(a.t == b.t);
    for (std::size_t i = 0; i < a.t.size(); ++i) CHECK(b.worst[i] >= a.worst[i]);
  }
}

TEST_CASE("worker count does not change results") {
  ScenarioSpec s = toy(5);
  s.policies = {"ts", "greedy"};
  const ExperimentReport serial = run_experiment(s);
  s.workers = 4;
  const ExperimentReport parallel = run_experiment(s);
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t k = 0; k < 5; ++k) check_identical(serial.traces[p][k], parallel.traces[p][k]);
  std::ostringstream a, b;
  write_csv(a, curve_rows("x", serial.curves));
  write_csv(b, curve_rows("x", parallel.curves));
  CHECK(a.str() == b.str());
}

TEST_CASE("oracle pulls satisfy the arm-count bound") {
  ScenarioSpec s = toy(3);
  s.horizon = 5000;
  s.margin_samples = 20000;
  for (std::size_t k = 0; k < 3; ++k) {
    const RunTrace tr = run_single(s, "oracle", k);
    for (const auto& flag : arm_count_check(tr, tr.p_hat, s.horizon))
      if (flag) CHECK(*flag);
  }
}

TEST_CASE("shared-parameter scenarios run with one posterior") {
  ScenarioSpec s = toy();
  s.mode = ArmMode::shared_param;
  const Environment env = scenario_for_run(s, 0);
  CHECK(env.arms.mu[0] == env.arms.mu[2]);
  auto policy = make_policy("ts", env, 1.0);
  CHECK(policy->posterior()->shared());
  const RunTrace tr = run_single(s, "ts", 0);
  CHECK(tr.checkpoints.back().est_error[0] == tr.checkpoints.back().est_error[1]);
}

TEST_CASE("real-data runs") {
  ScenarioSpec s;
  s.name = "real";
  s.dataset_path = std::filesystem::path(POBANDIT_DATA_DIR) / "eye_standin.csv";
  s.d_y = 13;
  s.horizon = 400;
  s.checkpoint_every = 100;
  s.margin_samples = 0;
  s.policies = {"ts", "regression_oracle"};
  s.runs = 2;
  s.workers = 1;
  const ExperimentReport rep = run_experiment(s);
  CHECK(rep.traces[0][0].num_arms == 3);
  CHECK(rep.traces[0][0].correct.size() == 400);
  for (double g : rep.traces[1][0].gaps) CHECK(g == 0.0);
  CHECK(rep.find("ts", "cdr"));
  CHECK(rep.theorems.empty());

  s.policies = {"oracle"};
  CHECK_THROWS_AS(run_experiment(s), Error);
}

TEST_CASE("figure recipes") {
  CHECK(figure_recipe(1).size() == 16);
  CHECK(figure_recipe(2).size() == 3);
  CHECK(figure_recipe(3).size() == 3);
  CHECK(figure_recipe(4).size() == 4);
  for (const auto& s : figure_recipe(3, 2, 500)) {
    CHECK(s.runs == 2);
    CHECK(s.horizon == 500);
    CHECK(s.policies == std::vector<std::string>{"ts", "greedy"});
  }
  CHECK_THROWS_AS(figure_recipe(5), Error);
}

TEST_CASE("CSV emission") {
  std::ostringstream empty;
  write_csv(empty, curve_rows("none", std::vector<SeriesCurve>{}));
  CHECK(empty.str() == std::string(kCsvHeader) + "\n");

  const ExperimentReport rep = run_experiment(toy(2));
  const auto rows = run_rows(rep);
  std::ostringstream out;
  write_csv(out, rows);
  std::istringstream in(out.str());
  const auto back = read_csv(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(back[i] == rows[i]);

  const double awkward[] = {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23};
  for (double v : awkward) CHECK(std::stod(format_value(v)) == v);
}

TEST_CASE("emit writes CSV, report and well-formed SVG") {
  ExperimentReport rep = run_experiment(toy(2));
  rep.spec.name = "toy<&>";
  const auto dir = std::filesystem::temp_directory_path() / "pobandit_emit_test";
  std::filesystem::remove_all(dir);
  const EmittedFiles files = emit(rep, dir, true);
  CHECK(std::filesystem::exists(files.curves_csv));
  CHECK(std::filesystem::exists(files.runs_csv));
  CHECK(std::filesystem::exists(files.report_txt));
  REQUIRE(!files.svgs.empty());
  for (const auto& path : files.svgs) {
    std::ifstream in(path);
    const std::string doc((std::istreambuf_iterator<char>(in)), {});
    CHECK_MESSAGE(well_formed_xml(doc), path.string());
  }
  std::ifstream report(files.report_txt);
  const std::string text((std::istreambuf_iterator<char>(report)), {});
  CHECK(text.find("seed.1 = " + std::to_string(rep.seeds[1])) != std::string::npos);
  CHECK(text.find("theorems.ts") != std::string::npos);
  std::filesystem::remove_all(dir);

  CHECK(!well_formed_xml("<svg><g></svg>"));
  CHECK(!well_formed_xml("<svg a=1/>"));
  CHECK(!well_formed_xml("<svg>a & b</svg>"));
}
