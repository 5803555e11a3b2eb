#include <random>

#include <gtest/gtest.h>

#include "folti/dynamics.hpp"
#include "folti/error.hpp"
#include "instances.hpp"
#include "oracles.hpp"

namespace folti {
namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }
Vec vec1(double v) { return Vec::Constant(1, v); }

TEST(ASequence, Examples) {
  const FoltiModel zero(scalar(0.0), scalar(1.0), FracOrder({0.5}));
  EXPECT_DOUBLE_EQ(a_j_sequence(zero, 1)[0](0, 0), -0.5);

  const FoltiModel m(scalar(0.3), scalar(1.0), FracOrder({0.5}));
  const MatSeq seq = a_j_sequence(m, 2);
  ASSERT_EQ(seq.size(), 2u);
  EXPECT_DOUBLE_EQ(seq[0](0, 0), -0.2);
  EXPECT_DOUBLE_EQ(seq[1](0, 0), 0.125);

  const FoltiModel unit(Mat::Identity(2, 2), Mat::Identity(2, 1), FracOrder({1.0, 1.0}));
  for (const Mat& a : a_j_sequence(unit, 3)) EXPECT_EQ(a, Mat::Zero(2, 2));

  EXPECT_THROW(a_j_sequence(m, 0), DomainError);
}

TEST(ASequence, AddedConvention) {
  const FoltiModel m(scalar(0.3), scalar(1.0), FracOrder({0.5}), Convention::kOrderAdded);
  const MatSeq seq = a_j_sequence(m, 2);
  EXPECT_DOUBLE_EQ(seq[0](0, 0), 0.8);
  EXPECT_DOUBLE_EQ(seq[1](0, 0), 0.125);
}

TEST(Propagators, Examples) {
  const FoltiModel m(scalar(0.3), scalar(1.0), FracOrder({0.5}));
  const PropagatorSet p0 = propagators(m, 0);
  ASSERT_EQ(p0.g.size(), 1u);
  EXPECT_EQ(p0.g[0], Mat::Identity(1, 1));
  EXPECT_DOUBLE_EQ(propagators(m, 1).g[1](0, 0), -0.2);
  EXPECT_NEAR(propagators(m, 2).g[2](0, 0), 0.165, 1e-15);
}

TEST(Propagators, RecursionHolds) {
  std::mt19937_64 rng(5);
  const auto inst = testing::random_instance(rng, {.n_min = 3, .n_max = 3, .t_min = 12, .t_max = 12});
  const PropagatorSet p = propagators(inst.model, 12);
  EXPECT_EQ(p.g[0], Mat::Identity(3, 3));
  for (int k = 1; k <= 12; ++k) {
    Mat sum = Mat::Zero(3, 3);
    for (int j = 0; j < k; ++j) sum += p.a_seq[j] * p.g[k - 1 - j];
    EXPECT_LE((p.g[k] - sum).norm(), 1e-12 * (1.0 + sum.norm()));
  }
}

TEST(Simulate, ConventionExamples) {
  const std::vector<Vec> u{vec1(1.0), vec1(0.0)};
  const FoltiModel added(scalar(0.3), scalar(1.0), FracOrder({0.5}), Convention::kOrderAdded);
  const Trajectory ta = simulate(added, vec1(1.0), u);
  EXPECT_DOUBLE_EQ(ta.states[1][0], 1.8);
  EXPECT_NEAR(ta.states[2][0], 1.565, 1e-15);

  const FoltiModel sub(scalar(0.3), scalar(1.0), FracOrder({0.5}));
  const Trajectory ts = simulate(sub, vec1(1.0), u);
  EXPECT_DOUBLE_EQ(ts.states[1][0], 0.8);
  // x2 = -0.2 * 0.8 + 0.125 * 1
  EXPECT_NEAR(ts.states[2][0], -0.035, 1e-15);
}

TEST(Simulate, ZeroIsFixedPoint) {
  const FoltiModel m(Mat::Identity(2, 2) * 0.4, Mat::Ones(2, 1), FracOrder({0.3, 0.9}));
  const std::vector<Vec> u(20, Vec::Zero(1));
  for (const Vec& x : simulate(m, Vec::Zero(2), u).states) EXPECT_EQ(x, Vec::Zero(2));
}

TEST(Simulate, MatchesNaiveExpansion) {
  std::mt19937_64 rng(8);
  for (auto conv : {Convention::kOrderSubtracted, Convention::kOrderAdded}) {
    for (int trial = 0; trial < 20; ++trial) {
      auto inst = testing::random_instance(rng, {.t_min = 1, .t_max = 30, .convention = conv});
      VecSeq u;
      for (int k = 0; k < inst.horizon; ++k) u.push_back(testing::uniform(rng, inst.model.input_dim(), 1));
      const Trajectory t = simulate(inst.model, inst.x0, u);
      const VecSeq ref = testing::naive_states(inst.model, inst.x0, u);
      for (int k = 0; k <= inst.horizon; ++k) {
        EXPECT_LE((t.states[k] - ref[k]).lpNorm<Eigen::Infinity>(), 1e-11 * (1.0 + ref[k].lpNorm<Eigen::Infinity>()));
      }
    }
  }
}

TEST(Simulate, IntegerOrderIsPlainRecursion) {
  std::mt19937_64 rng(9);
  auto inst = testing::random_instance(rng, {.t_min = 25, .t_max = 25, .integer_order = true});
  const Mat a_eff = inst.model.one_step_matrix();
  EXPECT_EQ(a_eff, inst.model.a() - Mat::Identity(inst.model.state_dim(), inst.model.state_dim()));
  VecSeq u;
  for (int k = 0; k < 25; ++k) u.push_back(testing::uniform(rng, inst.model.input_dim(), 1));
  const Trajectory t = simulate(inst.model, inst.x0, u);
  Vec x = inst.x0;
  for (int k = 0; k < 25; ++k) {
    x = a_eff * x + inst.model.b() * u[k];
    EXPECT_EQ(t.states[k + 1], x);
  }
}

TEST(Simulate, LinearityAndNoiseAdditivity) {
  std::mt19937_64 rng(10);
  auto inst = testing::random_instance(rng, {.t_min = 20, .t_max = 20});
  const int n = inst.model.state_dim(), m = inst.model.input_dim();
  VecSeq u1, u2, u12, w, zeros_u(20, Vec::Zero(m));
  for (int k = 0; k < 20; ++k) {
    u1.push_back(testing::uniform(rng, m, 1));
    u2.push_back(testing::uniform(rng, m, 1));
    u12.push_back(2.0 * u1.back() - 3.0 * u2.back());
    w.push_back(testing::uniform(rng, n, 1));
  }
  const Vec y0 = testing::uniform(rng, n, 1);
  const Trajectory a = simulate(inst.model, inst.x0, u1);
  const Trajectory b = simulate(inst.model, y0, u2);
  const Trajectory c = simulate(inst.model, 2.0 * inst.x0 - 3.0 * y0, u12);
  const Trajectory with_noise = simulate(inst.model, inst.x0, u1, w);
  const Trajectory noise_only = simulate(inst.model, Vec::Zero(n), zeros_u, w);
  for (int k = 0; k <= 20; ++k) {
    const Vec sup = 2.0 * a.states[k] - 3.0 * b.states[k];
    EXPECT_LE((c.states[k] - sup).norm(), 1e-10 * (1.0 + sup.norm()));
    const Vec diff = with_noise.states[k] - a.states[k];
    EXPECT_LE((diff - noise_only.states[k]).norm(), 1e-10 * (1.0 + diff.norm()));
  }
}

TEST(Simulate, MemoryTruncation) {
  const FoltiModel m(scalar(0.3), scalar(1.0), FracOrder({0.5}));
  const std::vector<Vec> u(10, vec1(1.0));
  const Trajectory full = simulate(m, vec1(1.0), u);
  const Trajectory same = simulate(m, vec1(1.0), u, {}, {.memory_length = 10});
  const Trajectory no_mem = simulate(m, vec1(1.0), u, {}, {.memory_length = 0});
  const Trajectory one_lag = simulate(m, vec1(1.0), u, {}, {.memory_length = 1});
  for (int k = 0; k <= 10; ++k) EXPECT_EQ(full.states[k], same.states[k]);
  // No memory terms leaves the plain recursion x_{k+1} = A_0 x_k + B u_k.
  double x = 1.0;
  for (int k = 0; k < 10; ++k) {
    x = -0.2 * x + 1.0;
    EXPECT_NEAR(no_mem.states[k + 1][0], x, 1e-15);
  }
  // One lag: x_2 = -0.2 * 0.8 + 0.125 * 1 + 1, and x_3 drops the x_0 term.
  EXPECT_NEAR(one_lag.states[2][0], 0.965, 1e-15);
  EXPECT_NEAR(one_lag.states[3][0], -0.2 * 0.965 + 0.125 * 0.8 + 1.0, 1e-15);
  EXPECT_NE(one_lag.states[4][0], full.states[4][0]);
}

TEST(Simulate, DimensionErrors) {
  const FoltiModel m(Mat::Zero(2, 2), Mat::Zero(2, 1), FracOrder({0.5, 0.5}));
  const std::vector<Vec> u(3, Vec::Zero(1));
  EXPECT_THROW(simulate(m, Vec::Zero(3), u), DimensionError);
  const std::vector<Vec> bad_u(3, Vec::Zero(2));
  EXPECT_THROW(simulate(m, Vec::Zero(2), bad_u), DimensionError);
  const std::vector<Vec> short_noise(2, Vec::Zero(2));
  EXPECT_THROW(simulate(m, Vec::Zero(2), u, short_noise), DimensionError);
  EXPECT_THROW(FoltiModel(Mat::Zero(2, 3), Mat::Zero(2, 1), FracOrder({0.5, 0.5})), DimensionError);
  EXPECT_THROW(FoltiModel(Mat::Zero(2, 2), Mat::Zero(3, 1), FracOrder({0.5, 0.5})), DimensionError);
  EXPECT_THROW(FoltiModel(Mat::Zero(2, 2), Mat::Zero(2, 1), FracOrder({0.5})), DimensionError);
}

TEST(ClosedForm, Examples) {
  const FoltiModel m(scalar(0.3), scalar(1.0), FracOrder({0.5}));
  const PropagatorSet p = propagators(m, 3);
  const std::vector<Vec> u{vec1(1.0)};
  EXPECT_EQ(closed_form_state(p, m, vec1(2.0), {}, 0)[0], 2.0);
  EXPECT_DOUBLE_EQ(closed_form_state(p, m, vec1(1.0), u, 1)[0], 0.8);
  EXPECT_THROW(closed_form_state(p, m, vec1(1.0), u, 4), DomainError);
  EXPECT_THROW(closed_form_state(p, m, vec1(1.0), u, 2), DimensionError);

  const FoltiModel no_b(scalar(0.3), scalar(0.0), FracOrder({0.5}));
  const PropagatorSet pb = propagators(no_b, 3);
  const std::vector<Vec> u3(3, vec1(5.0));
  EXPECT_EQ(closed_form_state(pb, no_b, vec1(1.5), u3, 3), pb.g[3] * vec1(1.5));
}

TEST(ClosedForm, AgreesWithSimulate) {
  std::mt19937_64 rng(12);
  for (auto conv : {Convention::kOrderSubtracted, Convention::kOrderAdded}) {
    for (int trial = 0; trial < 25; ++trial) {
      auto inst = testing::random_instance(rng, {.t_min = 1, .t_max = 64, .convention = conv});
      VecSeq u;
      for (int k = 0; k < inst.horizon; ++k) u.push_back(testing::uniform(rng, inst.model.input_dim(), 1));
      const Trajectory t = simulate(inst.model, inst.x0, u);
      const PropagatorSet p = propagators(inst.model, inst.horizon);
      for (int k = 0; k <= inst.horizon; ++k) {
        const Vec cf = closed_form_state(p, inst.model, inst.x0, std::span(u).first(k), k);
        EXPECT_LE((cf - t.states[k]).lpNorm<Eigen::Infinity>(), 1e-9);
      }
    }
  }
}

TEST(Convention, StringRoundTrip) {
  for (auto c : {Convention::kOrderSubtracted, Convention::kOrderAdded}) {
    EXPECT_EQ(convention_from_string(to_string(c)), c);
  }
  EXPECT_THROW(convention_from_string("sideways"), ConfigError);
}

}  // namespace
}  // namespace folti
