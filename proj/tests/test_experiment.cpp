#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "stablewalk/experiment.hpp"

using namespace stablewalk;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  const auto dir = fs::temp_directory_path() / "stablewalk_test_experiment";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentPlan small_r3_plan() {
  ExperimentPlan plan;
  plan.regime = Regime::r3;
  plan.alpha = 2.0;
  plan.beta = 0.0;
  plan.c = 0.5;
  plan.t = 1.0;
  plan.ladder = {{512, 4, 256}};
  plan.budget_per_triple = 300;
  plan.seed = 424242;
  plan.label = "unit";
  return plan;
}

}  // namespace

TEST_CASE("regime names round trip") {
  for (const Regime r :
       {Regime::r1, Regime::r2, Regime::r3, Regime::r4, Regime::r5}) {
    CHECK(regime_from_string(to_string(r)) == r);
  }
  CHECK_THROWS_AS(regime_from_string("r9"), DomainError);
}

TEST_CASE("default triples follow the documented window rules") {
  const auto t1 = default_triple(Regime::r1, 4096);
  CHECK(t1.r == 12);  // 4 * ceil(4096^(1/8)) = 4 * 3
  CHECK(t1.k == 64);
  const auto t2 = default_triple(Regime::r2, 1024, 1.0);
  CHECK(t2.r == 32);
  CHECK(t2.k == 32);
  const auto t3 = default_triple(Regime::r3, 4096);
  CHECK(t3.k == 8);
  CHECK(t3.r == 2048);
  const auto t4 = default_triple(Regime::r4, 1024, 1.0);
  CHECK(t4.k == 32);
  CHECK(t4.m() == 32);
  const auto t5 = default_triple(Regime::r5, 4096);
  CHECK(t5.m() == 12);
  CHECK(t5.k == 64);
}

TEST_CASE("plan validation rejects malformed ladders") {
  auto plan = small_r3_plan();
  CHECK_NOTHROW(validate_plan(plan));

  auto bad = plan;
  bad.ladder = {{512, 64, 256}};  // k far beyond min(r, n-r)/8
  CHECK_THROWS_AS(validate_plan(bad), RegimeViolation);

  bad = plan;
  bad.ladder = {{512, 4, 600}};  // r > n
  CHECK_THROWS_AS(validate_plan(bad), RegimeViolation);

  bad = plan;
  bad.ladder.clear();
  CHECK_THROWS_AS(validate_plan(bad), DomainError);

  bad = plan;
  bad.alpha = 2.0;
  bad.beta = 0.5;  // inadmissible pair
  CHECK_THROWS_AS(validate_plan(bad), OutOfSetA);

  bad = plan;
  bad.budget_ladder = {100, 200};  // wrong length for a 1-rung ladder
  CHECK_THROWS_AS(validate_plan(bad), DomainError);

  bad = plan;
  bad.w = -0.25;
  CHECK_THROWS_AS(validate_plan(bad), DomainError);
}

TEST_CASE("ks distance on hand curves") {
  const double ks = ks_distance({1.0, 2.0}, {0.3, 1.0}, {0.0, 3.0}, {0.0, 1.0});
  CHECK(ks == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(ks_distance({1.0, 2.0}, {0.3, 1.0}, {1.5, 3.0}, {0.0, 1.0}),
                  GridMismatch);
}

TEST_CASE("localization fraction from hand-built window stats") {
  ConditionedSample s;
  s.window_starts = {100, 800};
  for (const std::int64_t tau : {900, 950, 700}) {
    PathSummary p;
    p.endpoint = 0.0;
    p.m_n = 0.0;
    p.weight = 1.0;
    p.win = {WindowStat{0.0, tau / 8, 0.0}, WindowStat{0.0, tau, 0.0}};
    s.paths.push_back(p);
  }
  s.ess = 3.0;
  CHECK(localization_fraction(s, 1, 800) == doctest::Approx(2.0 / 3.0));
  CHECK(localization_fraction(s, 1, 0) == doctest::Approx(1.0));
}

TEST_CASE("single-rung mid-window experiment: sane, deterministic artifacts") {
  const auto plan = small_r3_plan();
  const auto rep = run_experiment(plan);
  REQUIRE(rep.triples.size() == 1);
  const auto& tr = rep.triples[0];
  CHECK(tr.attempts > 0u);
  CHECK_FALSE(tr.shortfall);
  CHECK(tr.ess == doctest::Approx(300.0));
  CHECK(tr.ks >= 0.0);
  CHECK(tr.ks < 0.25);
  CHECK(tr.localization >= 0.0);
  CHECK(tr.localization <= 1.0);
  REQUIRE(tr.y.size() == 41);  // default grid
  REQUIRE(tr.emp.size() == tr.y.size());
  REQUIRE(tr.theory.size() == tr.y.size());
  for (std::size_t i = 0; i + 1 < tr.emp.size(); ++i) {
    CHECK(tr.emp[i] <= tr.emp[i + 1] + 1e-12);
    CHECK(tr.emp[i] >= 0.0);
    CHECK(tr.emp[i + 1] <= 1.0);
  }
  CHECK(tr.theory.back() == doctest::Approx(1.0).epsilon(1e-9));

  // Byte-identical serialization across two identically seeded runs.
  const auto rep2 = run_experiment(plan);
  const auto dir = test_dir();
  serialize_report(rep, "json", (dir / "a.json").string());
  serialize_report(rep2, "json", (dir / "b.json").string());
  serialize_report(rep, "csv", (dir / "a.csv").string());
  serialize_report(rep2, "csv", (dir / "b.csv").string());
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv").rfind("regime,alpha,beta,c,t,theta,n,k,r,w,y,", 0) ==
        0);
}

TEST_CASE("report json round trip preserves every field") {
  const auto plan = small_r3_plan();
  const auto rep = run_experiment(plan);
  const auto dir = test_dir();
  const auto path = (dir / "roundtrip.json").string();
  serialize_report(rep, "json", path);
  const auto back = load_report_json(path);
  CHECK(back.regime == rep.regime);
  CHECK(back.alpha == rep.alpha);
  CHECK(back.beta == rep.beta);
  CHECK(back.c == rep.c);
  CHECK(back.t == rep.t);
  CHECK(back.theta == rep.theta);
  CHECK(back.w == rep.w);
  CHECK(back.seed == rep.seed);
  CHECK(back.label == rep.label);
  REQUIRE(back.triples.size() == rep.triples.size());
  CHECK(back.triples[0].triple.n == rep.triples[0].triple.n);
  CHECK(back.triples[0].ks == rep.triples[0].ks);
  CHECK(back.triples[0].y == rep.triples[0].y);
  CHECK(back.triples[0].emp == rep.triples[0].emp);
  CHECK(back.flags == rep.flags);

  const auto rewritten = (dir / "roundtrip2.json").string();
  serialize_report(back, "json", rewritten);
  CHECK(slurp(path) == slurp(rewritten));

  CHECK_THROWS_AS(serialize_report(rep, "xml", (dir / "x.xml").string()),
                  SerializationError);
}

TEST_CASE("a wrong theory curve is detected by the ks statistic") {
  auto plan = small_r3_plan();
  const auto honest = run_experiment(plan);
  plan.theory_override = [](double, const Triple&) { return 0.5; };
  const auto wrong = run_experiment(plan);
  CHECK(wrong.triples[0].ks > 0.25);
  CHECK(wrong.triples[0].ks > honest.triples[0].ks + 0.1);
}

TEST_CASE("sampler shortfall is flagged, not fatal") {
  auto plan = small_r3_plan();
  plan.budget_per_triple = 5000;
  plan.max_attempts_per_triple = 3000;  // not nearly enough
  const auto rep = run_experiment(plan);
  CHECK(rep.triples[0].shortfall);
  REQUIRE(!rep.flags.empty());
  bool mentioned = false;
  for (const auto& f : rep.flags) {
    if (f.find("SamplerShortfall") != std::string::npos) mentioned = true;
  }
  CHECK(mentioned);
}

TEST_CASE("convergence sweep needs three rungs and tracks ks per rung") {
  auto plan = small_r3_plan();
  plan.ladder = {{128, 4, 64}, {512, 4, 256}};
  CHECK_THROWS_AS(convergence_sweep(plan), DomainError);

  plan.ladder = {{128, 4, 64}, {256, 4, 128}, {512, 4, 256}};
  plan.budget_per_triple = 300;
  const auto sweep = convergence_sweep(plan);
  CHECK(sweep.ks.size() == 3);
  CHECK(sweep.ks_err.size() == 3);
  for (const double e : sweep.ks_err) CHECK(e > 0.0);
}

TEST_CASE("artifact cache reuses builds and exposes closed-form sources") {
  ArtifactCache cache(17, CacheBudgets::smoke());
  const Stable st(2.0, 0.0, 0.5);
  const auto& t1 = cache.renewal(st, Direction::descending);
  const auto& t2 = cache.renewal(st, Direction::descending);
  CHECK(&t1 == &t2);
  const auto& t3 = cache.renewal(st, Direction::ascending);
  CHECK(&t1 != &t3);

  CHECK(cache.meander_source(st, Direction::ascending).is_closed_form());
  CHECK(cache.constant_integral_route(st, Direction::descending) ==
        doctest::Approx(1.0 / std::sqrt(M_PI * 0.5)).epsilon(1e-12));
}

TEST_CASE("balanced-window rung reuses the short-tail rung's ensemble") {
  // The two regimes at theta = 1 share the window pair {k, n-k}; with equal
  // budgets and a common seed the in-process sample memo must make the
  // second run free and its report byte-identical across orderings.
  ArtifactCache cache(23, CacheBudgets::smoke());

  ExperimentPlan p2;
  p2.regime = Regime::r2;
  p2.alpha = 2.0;
  p2.beta = 0.0;
  p2.c = 0.5;
  p2.t = 1.0;
  p2.theta = 1.0;
  p2.ladder = {{256, 16, 16}};
  p2.budget_per_triple = 200;
  p2.seed = 777;
  p2.label = "bal";

  ExperimentPlan p4 = p2;
  p4.regime = Regime::r4;
  p4.ladder = {{256, 16, 240}};
  p4.label = "tail";

  const auto r2a = run_experiment(p2, &cache);
  const auto r4a = run_experiment(p4, &cache);
  CHECK(r2a.triples[0].attempts == r4a.triples[0].attempts);
  CHECK(r2a.triples[0].acceptance_rate ==
        doctest::Approx(r4a.triples[0].acceptance_rate));
}
