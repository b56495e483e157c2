#include <doctest.h>

#include <cmath>
#include <vector>

#include "seatwin/metrics.hpp"

using namespace seatwin;

TEST_CASE("mae: basics") {
  std::vector<double> e{1.0, -2.0, 3.0};
  CHECK(mae(e) == doctest::Approx(2.0));
  std::vector<double> z{0.0, 0.0, 0.0};
  CHECK(mae(z) == 0.0);
  std::vector<double> empty;
  CHECK_THROWS_AS(mae(empty), std::invalid_argument);
}

TEST_CASE("mae: expectation of |U(-10,10)| is 5") {
  Rng rng(606);
  std::vector<double> e(100000);
  for (double& v : e) v = rng.uniform(-10.0, 10.0);
  CHECK(mae(e) == doctest::Approx(5.0).epsilon(0.02));
}

TEST_CASE("overshoot: definition on peaks") {
  std::vector<double> t175{10.0, -175.0, 40.0};
  CHECK(overshoot_pct(t175, 50.0) == doctest::Approx(250.0));
  std::vector<double> t75{75.0, 20.0};
  CHECK(overshoot_pct(t75, 50.0) == doctest::Approx(50.0));
  std::vector<double> exact{50.0, -50.0};
  CHECK(overshoot_pct(exact, 50.0) == doctest::Approx(0.0));
  std::vector<double> low{10.0};
  CHECK(overshoot_pct(low, 50.0) == doctest::Approx(-80.0));
  std::vector<double> empty;
  CHECK_THROWS_AS(overshoot_pct(empty, 50.0), std::invalid_argument);
}

TEST_CASE("binning: chirp samples land by analytic instantaneous frequency") {
  auto spec = TrajectorySpec::chirp(50.0, 0.05, 0.35, 60.0);
  EpisodeLog log;
  const double dt = 0.01;
  for (int i = 0; i < 6000; ++i) {
    StepRecord r;
    r.t = i * dt;
    r.f_des = desired_force(spec, r.t);
    r.f = r.f_des - 1.0;  // constant 1 N error everywhere
    log.steps.push_back(r);
  }
  log.peak_abs_force_n = 51.0;

  const EvalReport rep = evaluate_log(log, spec);
  REQUIRE(rep.bins.size() == 6);
  std::size_t binned = 0;
  for (const auto& b : rep.bins) {
    CHECK(b.mae_n == doctest::Approx(1.0));
    // Linear sweep spends equal time in equal-width bins.
    CHECK(b.count == doctest::Approx(1000).epsilon(0.01));
    binned += b.count;
  }
  CHECK(binned == log.steps.size());
  CHECK(rep.bins.front().lo_hz == doctest::Approx(0.05));
  CHECK(rep.bins.back().hi_hz == doctest::Approx(0.35));
  CHECK(rep.mae_n == doctest::Approx(1.0));
}

TEST_CASE("binning: constant-frequency sinusoid occupies one bin") {
  auto spec = TrajectorySpec::sinusoid(50.0, 0.12);
  EpisodeLog log;
  for (int i = 0; i < 1000; ++i) {
    StepRecord r;
    r.t = i * 0.01;
    r.f_des = desired_force(spec, r.t);
    r.f = r.f_des;
    log.steps.push_back(r);
  }
  const EvalReport rep = evaluate_log(log, spec);
  CHECK(rep.bins[1].count == 1000);  // [0.10, 0.15)
  for (std::size_t b = 0; b < rep.bins.size(); ++b)
    if (b != 1) CHECK(rep.bins[b].count == 0);
}

TEST_CASE("eval report: stability mirrors e-stop truncation") {
  auto spec = TrajectorySpec::sinusoid(50.0, 0.1);
  EpisodeLog log;
  StepRecord r;
  r.f_des = 10.0;
  r.f = 0.0;
  log.steps.push_back(r);
  log.estop_truncated = true;
  CHECK(!evaluate_log(log, spec).stable);
  log.estop_truncated = false;
  CHECK(evaluate_log(log, spec).stable);
}
