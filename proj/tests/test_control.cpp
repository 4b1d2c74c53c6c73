#include <doctest.h>

#include <cmath>
#include <random>

#include "netloss/certificates.hpp"
#include "netloss/control.hpp"
#include "netloss/errors.hpp"
#include "support.hpp"

using namespace netloss;

namespace {

const PlantModel kScalar{Mat{{2.0}}, Mat{{1.0}}};

TriggerController scalar_ctrl(double k = -1.75, double beta = 0.0625, std::uint64_t theta = 1) {
  return TriggerController(Mat{{k}}, Mat{{1.0}}, beta, theta);
}

SimConfig cfg_for(Vec x0, std::uint64_t horizon, std::uint64_t seed) {
  SimConfig c;
  c.x0 = std::move(x0);
  c.horizon = horizon;
  c.seed = seed;
  return c;
}

double ln_v(const SimResult& r, std::size_t t) { return std::log(r.v_trace.at(t)); }

}  // namespace

TEST_CASE("plant and controller validation") {
  CHECK_THROWS_AS(PlantModel(Mat{{1.0, 0.0}}, Mat{{1.0}}), ValidationError);
  CHECK_THROWS_AS(PlantModel(Mat::identity(2), Mat{{1.0}}), ValidationError);
  CHECK_THROWS_AS(TriggerController(Mat{{1.0}}, Mat{{-1.0}}, 0.5, 1), ValidationError);
  CHECK_THROWS_AS(TriggerController(Mat{{1.0}}, Mat{{1.0}}, 1.0, 1), ValidationError);
  CHECK_THROWS_AS(TriggerController(Mat{{1.0}}, Mat{{1.0}}, 0.5, 0), ValidationError);
  CHECK_THROWS_AS(check_compatible(kScalar, TriggerController(Mat{{1.0, 1.0}}, Mat::identity(2), 0.5, 1)),
                  ValidationError);
  SimConfig bad = cfg_for(Vec{1.0}, 10, 0);
  bad.converge_threshold = 1e10;
  CHECK_THROWS_AS(validate(bad, kScalar), ValidationError);
  CHECK_THROWS_AS(validate(cfg_for(Vec{1.0, 2.0}, 10, 0), kScalar), ValidationError);
}

TEST_CASE("trigger rule") {
  const auto every = scalar_ctrl();
  CHECK(trigger_due(every, Vec{0.0}, 1.0, 1));

  // V(predicted) = beta V(last) exactly: no trigger (strict inequality).
  const TriggerController lazy(Mat{{-1.75}}, Mat{{1.0}}, 0.25, 5);
  CHECK_FALSE(trigger_due(lazy, Vec{0.5}, 1.0, 1));
  CHECK(trigger_due(lazy, Vec{0.5000001}, 1.0, 1));
  CHECK(trigger_due(lazy, Vec{0.0}, 1.0, 5));

  // Success at x = 1 holds u = -1.75; x(1) = 0.25, prediction x(2) = -1.25.
  const TriggerController ex2(Mat{{-1.75}}, Mat{{1.0}}, 0.0625, 10);
  const Vec x1 = step_closed_loop(kScalar, Vec{1.0}, Vec{-1.75});
  CHECK(x1[0] == doctest::Approx(0.25));
  const Vec pred = step_closed_loop(kScalar, x1, Vec{-1.75});
  CHECK(pred[0] == doctest::Approx(-1.25));
  CHECK(trigger_due(ex2, pred, 1.0, 1));
}

TEST_CASE("closed-loop step") {
  const PlantModel id(Mat::identity(2), Mat{{1.0}, {0.0}});
  const Vec x{3.0, -4.0};
  const Vec same = step_closed_loop(id, x, Vec{0.0});
  CHECK(same[0] == 3.0);
  CHECK(same[1] == -4.0);
  CHECK(step_closed_loop(kScalar, Vec{2.0}, Vec{-3.5})[0] == doctest::Approx(0.5));  // 0.25 x
  CHECK(step_closed_loop(kScalar, Vec{2.0}, Vec{0.0})[0] == doctest::Approx(4.0));   // 2 x
}

TEST_CASE("zero initial state converges immediately") {
  const SimResult r = simulate(kScalar, scalar_ctrl(), LossChannel::never_fail(), cfg_for(Vec{0.0}, 100, 1));
  CHECK(r.verdict == Verdict::converged);
  for (const Vec& x : r.states) CHECK(x[0] == 0.0);
}

TEST_CASE("A = 0 plant converges in one step") {
  const PlantModel zero(Mat{{0.0}}, Mat{{1.0}});
  const SimResult r = simulate(zero, scalar_ctrl(0.0), LossChannel::never_fail(), cfg_for(Vec{1.0}, 100, 1));
  CHECK(r.verdict == Verdict::converged);
  CHECK(r.final_time() == 1);
}

TEST_CASE("never-fail channel contracts by beta per attempt") {
  const Mat a = netloss::testing::ex1_a();
  const Mat b = netloss::testing::ex1_b();
  const GainPair g = gain_from_qm(netloss::testing::ex1_q(), netloss::testing::ex1_m());
  const PlantModel plant(a, b);
  const TriggerController ctrl(g.k, g.p, 0.55, 1000);
  SimConfig cfg = cfg_for(Vec{1.0, 1.0}, 300, 3);
  cfg.converge_threshold = 1e-200;
  const SimResult r = simulate(plant, ctrl, LossChannel::never_fail(), cfg);
  const double v0 = r.v_trace[0];
  for (std::size_t k = 0; k < r.trigger_times.size(); ++k) {
    CHECK(r.v_trace[r.trigger_times[k]] <= std::pow(0.55, static_cast<double>(k)) * v0 * (1.0 + 1e-9));
  }
  CHECK(r.trigger_times.size() < r.final_time());  // the trigger actually skips steps
}

TEST_CASE("trigger-time invariants and held inputs") {
  const Mat a = netloss::testing::ex1_a();
  const Mat b = netloss::testing::ex1_b();
  const GainPair g = gain_from_qm(netloss::testing::ex1_q(), netloss::testing::ex1_m());
  const PlantModel plant(a, b);
  const TriggerController ctrl(g.k, g.p, 0.55, 7);
  const LossChannel ch(netloss::testing::ex1_chain(), BudgetGreedy{2.0, 5.0}, Dependence::independent);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    SimConfig cfg = cfg_for(Vec{1.0, 1.0}, 400, seed);
    cfg.converge_threshold = 1e-100;
    const SimResult r = simulate(plant, ctrl, ch, cfg);
    REQUIRE(!r.trigger_times.empty());
    CHECK(r.trigger_times.front() == 0);
    for (std::size_t i = 1; i < r.trigger_times.size(); ++i) {
      const auto gap = r.trigger_times[i] - r.trigger_times[i - 1];
      CHECK(gap >= 1);
      CHECK(gap <= 7);
    }
    // Inputs change only at attempt instants.
    std::size_t next = 1;
    for (std::size_t t = 1; t < r.inputs.size(); ++t) {
      if (next < r.trigger_times.size() && r.trigger_times[next] == t) {
        ++next;
        continue;
      }
      CHECK(r.inputs[t][0] == r.inputs[t - 1][0]);
    }
    // Level guarantee after each successful exchange.
    for (std::size_t i = 0; i < r.trigger_times.size(); ++i) {
      if (r.loss.bits()[i] != 0) continue;
      const std::size_t start = r.trigger_times[i];
      const std::size_t stop = i + 1 < r.trigger_times.size() ? r.trigger_times[i + 1] : r.final_time();
      for (std::size_t t = start + 1; t <= stop; ++t) {
        CHECK(r.v_trace[t] <= 0.55 * r.v_trace[start] * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("replays are bit-identical") {
  const LossChannel ch(netloss::testing::ex2_chain(), BudgetGreedy{0.0, 3.0}, Dependence::independent);
  const SimResult a = simulate(kScalar, scalar_ctrl(), ch, cfg_for(Vec{1.0}, 300, 9));
  const SimResult b = simulate(kScalar, scalar_ctrl(), ch, cfg_for(Vec{1.0}, 300, 9));
  CHECK(a.v_trace == b.v_trace);
  CHECK(a.loss.bits() == b.loss.bits());
}

TEST_CASE("Lyapunov exponent diagnostic") {
  const SimConfig cfg = [] {
    SimConfig c = cfg_for(Vec{1.0}, 5, 1);
    c.trace_attempts = 100;
    return c;
  }();
  const SimResult ok = simulate(kScalar, scalar_ctrl(), LossChannel::never_fail(), cfg);
  CHECK(lyap_exponent_estimate(ok, 0.0625, 4.0) == doctest::Approx(std::log(0.0625)));

  const LossChannel dead(MarkovLossModel::bernoulli(1.0), NoAttack{}, Dependence::independent);
  const SimResult lost = simulate(kScalar, scalar_ctrl(), dead, cfg);
  CHECK(lyap_exponent_estimate(lost, 0.0625, 4.0) == doctest::Approx(std::log(4.0)));

  SimConfig periodic = cfg_for(Vec{1.0}, 5, 1);
  periodic.trace_attempts = 3000;
  const LossChannel tau3(MarkovLossModel::never_fail(), BudgetGreedy{0.0, 3.0}, Dependence::independent);
  const SimResult p = simulate(kScalar, scalar_ctrl(), tau3, periodic);
  const double expected = (2.0 / 3.0) * std::log(0.0625) + (1.0 / 3.0) * std::log(4.0);
  CHECK(std::abs(lyap_exponent_estimate(p, 0.0625, 4.0) - expected) < 1e-3);
}

TEST_CASE("Example 2 stable and unstable budgets") {
  const auto chain = netloss::testing::ex2_chain();
  const LossChannel tau3(chain, BudgetGreedy{0.0, 3.0}, Dependence::independent);
  const LossChannel tau2(chain, BudgetGreedy{0.0, 2.0}, Dependence::independent);
  for (std::uint64_t path = 0; path < 50; ++path) {
    SimConfig c = cfg_for(Vec{1.0}, 500, path_seed(7, path));
    c.converge_threshold = 1e-300;
    const SimResult s = simulate(kScalar, scalar_ctrl(), tau3, c);
    CHECK(s.final_time() == 500);
    CHECK(ln_v(s, 500) < ln_v(s, 0));

    const SimResult u = simulate(kScalar, scalar_ctrl(), tau2, cfg_for(Vec{1.0}, 2000, path_seed(7, path)));
    CHECK(u.verdict == Verdict::diverged);
    CHECK(u.final_time() < 2000);
  }
}

TEST_CASE("state-threshold attacker sees ln V and cannot extend the trace") {
  const LossChannel st(netloss::testing::ex2_chain(), StateThreshold{0.0, 3.0, 5.0},
                       Dependence::attacker_observes_random);
  SimConfig c = cfg_for(Vec{1.0}, 3000, 4);
  c.diverge_threshold = 1e40;
  const SimResult r = simulate(kScalar, scalar_ctrl(), st, c);
  for (std::size_t i = 0; i < r.attack_loss.size(); ++i) {
    if (r.attack_loss.bits()[i]) CHECK(ln_v(r, r.trigger_times[i]) <= 5.0);
  }
  c.trace_attempts = 10;
  CHECK_THROWS_AS((void)simulate(kScalar, scalar_ctrl(), st, c), ConfigError);
}
