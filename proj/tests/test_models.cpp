#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lefi/models.hpp"
#include "lefi/rng.hpp"

using Catch::Approx;
using namespace lefi;

TEST_CASE("accuracy polynomial at pinned points") {
  const AccuracyModel m;
  CHECK(eval_accuracy(m, 0.0, 0.0) == Approx(0.073).margin(1e-15));
  CHECK(eval_accuracy(m, 0.0, 1.0) == Approx(0.155).margin(1e-12));
  const AccuracyModel zero{0, 0, 0, 0, 0, 0};
  CHECK(eval_accuracy(zero, 3.7, 0.4) == 0.0);
  CHECK_THROWS_AS(eval_accuracy(m, -0.1, 0.5), std::domain_error);
  CHECK_THROWS_AS(eval_accuracy(m, 1.0, 1.5), std::domain_error);
  CHECK_THROWS_AS(eval_accuracy(m, 1.0, -0.1), std::domain_error);
}

TEST_CASE("accuracy gradient at pinned points") {
  const AccuracyModel m;
  CHECK(accuracy_grad_d(m, 0.0, 0.0) == Approx(0.0151).margin(1e-15));
  // 2a*10 + c*0.5 + d with the default coefficients.
  const double expected = 2.0 * -0.000152 * 10.0 + -0.00117 * 0.5 + 0.0151;
  CHECK(expected == Approx(0.011475).margin(1e-12));
  CHECK(accuracy_grad_d(m, 10.0, 0.5) == Approx(0.011475).margin(1e-12));
  const AccuracyModel zero{0, 0, 0, 0, 0, 0};
  CHECK(accuracy_grad_d(zero, 5.0, 0.5) == 0.0);
}

TEST_CASE("accuracy gradient matches central finite difference") {
  const AccuracyModel m;
  Rng rng(42);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const double d = rng.uniform(h, 10.0);
    const double pi = rng.uniform(0.0, 1.0);
    const double fd =
        (eval_accuracy(m, d + h, pi) - eval_accuracy(m, d - h, pi)) / (2 * h);
    const double g = accuracy_grad_d(m, d, pi);
    CHECK(g == Approx(fd).epsilon(1e-6).margin(1e-10));
  }
}

TEST_CASE("accuracy is non-decreasing in d on the default range") {
  const AccuracyModel m;
  for (int i = 0; i <= 100; ++i) {
    const double d = 10.0 * i / 100.0;
    for (int j = 0; j <= 20; ++j) {
      const double pi = j / 20.0;
      CHECK(accuracy_grad_d(m, d, pi) >= 0.0);
    }
  }
}

TEST_CASE("reward curve at pinned points") {
  CHECK(eval_reward(1.0, 0.5, 0.0) == 0.0);
  CHECK(eval_reward(2.0, std::log(2.0), 1.0) == Approx(1.0).margin(1e-12));
  CHECK(eval_reward(0.5, 0.5, 4.0) ==
        Approx(0.43233235838169365).margin(1e-12));
  CHECK_THROWS_AS(eval_reward(-1.0, 0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(eval_reward(1.0, 0.5, -1.0), std::domain_error);
}

TEST_CASE("reward is bounded by alpha and monotone in d") {
  Rng rng(7);
  for (int i = 0; i < 300; ++i) {
    const double alpha = rng.uniform(0.0, 5.0);
    const double beta = rng.uniform(0.05, 2.0);
    const double d1 = rng.uniform(0.0, 10.0);
    const double d2 = d1 + rng.uniform(0.0, 5.0);
    const double r1 = eval_reward(alpha, beta, d1);
    const double r2 = eval_reward(alpha, beta, d2);
    CHECK(r1 >= 0.0);
    CHECK(r1 <= alpha);
    CHECK(r2 >= r1);
  }
}

TEST_CASE("compute model at pinned points") {
  const ComputeModel cm;
  CHECK(compute_flops(cm, 0.0) == Approx(17.6219).margin(1e-15));
  CHECK(compute_flops(cm, 1.0) == Approx(96.7478).margin(1e-12));
  CHECK(compute_flops(ComputeModel{0.0, 0.0}, 123.0) == 0.0);

  CHECK(compute_time(cm, 10.0, 28.9) == Approx(27.9889585).margin(1e-6));
  CHECK(compute_time(cm, 0.0, 17.6219) == Approx(1.0).margin(1e-12));
  CHECK(compute_time(ComputeModel{0.0, 0.0}, 4.0, 28.9) == 0.0);
  CHECK_THROWS_AS(compute_time(cm, 1.0, 0.0), std::domain_error);
}

TEST_CASE("compute cost at pinned points") {
  const ComputeModel cm;
  CavProfile p;
  p.theta = 0.0;
  CHECK(compute_cost(p, cm, 7.3) == 0.0);

  p.theta = 0.1;
  p.capacity_f = 28.9;
  CHECK(compute_cost(p, cm, 1.0) == Approx(0.334767474).margin(1e-8));

  CavProfile fixed;
  fixed.theta = 1.0;
  fixed.capacity_f = 28.9;
  CHECK(compute_cost(fixed, ComputeModel{0.0, 28.9}, 6.0) ==
        Approx(1.0).margin(1e-12));
}

TEST_CASE("cost and time are affine in d") {
  const ComputeModel cm;
  CavProfile p;
  p.theta = 0.37;
  p.capacity_f = 28.9;
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const double d1 = rng.uniform(0.0, 10.0);
    const double d2 = rng.uniform(0.0, 10.0);
    const double lhs = compute_cost(p, cm, d1) + compute_cost(p, cm, d2);
    const double rhs = compute_cost(p, cm, d1 + d2) + compute_cost(p, cm, 0.0);
    CHECK(lhs == Approx(rhs).margin(1e-12));
    const double tl = compute_time(cm, d1, 28.9) + compute_time(cm, d2, 28.9);
    const double tr =
        compute_time(cm, d1 + d2, 28.9) + compute_time(cm, 0.0, 28.9);
    CHECK(tl == Approx(tr).margin(1e-12));
  }
}

TEST_CASE("total payout") {
  std::vector<CavProfile> ps(2);
  ps[0].beta = std::log(2.0);
  ps[1].beta = std::log(2.0);
  CHECK(total_payout({0.0, 0.0}, ps, {1.0, 2.0}) == 0.0);
  CHECK(total_payout({1.0, 1.0}, ps, {1.0, 1.0}) == Approx(1.0).margin(1e-12));
  CHECK_THROWS_AS(total_payout({1.0}, ps, {1.0, 1.0}), std::invalid_argument);

  // Seeded instance against a high-precision scalar summation.
  Rng rng(99);
  std::vector<CavProfile> many(3);
  RewardWeights w(3);
  std::vector<double> d(3);
  for (int i = 0; i < 3; ++i) {
    many[i].beta = rng.uniform(0.1, 1.5);
    w[i] = rng.uniform(0.0, 2.0);
    d[i] = rng.uniform(0.0, 10.0);
  }
  long double expected = 0.0L;
  for (int i = 2; i >= 0; --i)
    expected += static_cast<long double>(w[i]) *
                (1.0L - std::exp(static_cast<long double>(-many[i].beta * d[i])));
  CHECK(total_payout(w, many, d) ==
        Approx(static_cast<double>(expected)).margin(1e-12));
}
