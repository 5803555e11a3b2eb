#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "folti/complexity.hpp"
#include "folti/error.hpp"
#include "folti/forge.hpp"
#include "instances.hpp"

namespace folti {
namespace {

Mat scalar(double v) { return Mat::Constant(1, 1, v); }

// A_0 = -0.2, B = Q = R = Q_f = 1, T = 1, x0 = 1: J = 1.02 at u = 0.1.
BoundInputs scalar_inputs() {
  return {FoltiModel(scalar(0.3), scalar(1.0), FracOrder({0.5})),
          CostSpec(scalar(1.0), scalar(1.0), scalar(1.0)),
          Vec::Ones(1), 1, 0.1, 10, 1};
}

BoundInputs random_inputs(std::uint64_t seed, double sigma = 0.1) {
  std::mt19937_64 rng(seed);
  auto inst = testing::random_instance(rng, {.n_min = 2, .n_max = 2, .m_min = 2, .m_max = 2, .t_min = 6, .t_max = 6});
  return {inst.model, inst.cost, inst.x0, inst.horizon, sigma, 20, 1};
}

TEST(TraceKb, ClosedForm) {
  EXPECT_NEAR(trace_kb_closed(2, 2, 0.1, 100, 53), 8e-6, 1e-20);
  EXPECT_EQ(trace_kb_closed(2, 2, 0.0, 100, 53), 0.0);
  EXPECT_THROW(trace_kb_closed(2, 2, 0.1, 1, 3), DomainError);
  EXPECT_THROW(trace_kb_closed(2, 2, 0.1, 0, 10), DomainError);
}

TEST(TraceKb, General) {
  const Mat phi = Mat::Identity(6, 3);
  EXPECT_EQ(trace_kb_general(phi, Mat::Zero(3, 3), 1), 0.0);
  EXPECT_NEAR(trace_kb_general(phi, 0.01 * Mat::Identity(3, 3), 1), 0.03, 1e-17);
  EXPECT_NEAR(trace_kb_general(phi, 0.01 * Mat::Identity(3, 3), 3), 0.01, 1e-17);
  EXPECT_THROW(trace_kb_general(Mat::Zero(6, 3), Mat::Identity(3, 3), 1), IdentifiabilityError);
}

TEST(TraceKb, MonteCarloMatchesClosedForm) {
  const FoltiModel model(Mat::Zero(2, 2), Mat::Ones(2, 2), FracOrder({0.5, 0.5}));
  const TraceEstimate est = monte_carlo_trace_kb(model, 0.1, 53, 1, 4000, 9);
  EXPECT_DOUBLE_EQ(est.closed, 8e-4);
  EXPECT_NEAR(est.mean / est.closed, 1.0, 0.05);
  EXPECT_NEAR(est.mean_general / est.closed, 1.0, 0.05);
}

TEST(Operators, ScalarHandValues) {
  const BoundOperators ops = assemble_operators(scalar_inputs());
  EXPECT_DOUBLE_EQ(ops.z[0], -0.2);
  EXPECT_DOUBLE_EQ(ops.s(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(ops.offset, 1.04);
  EXPECT_DOUBLE_EQ(ops.h_lambda_x0[0], -0.2);
  EXPECT_DOUBLE_EQ(ops.l_qg(0, 0), 1.0);
  EXPECT_NEAR(plug_in_cost(ops, scalar(1.0)), 1.02, 1e-15);
  EXPECT_NEAR(rollout_cost(ops, scalar(1.0)), 1.02, 1e-15);
  // With B_hat = 2 the input is 0.4/5 = 0.08; its true cost is 1 + 0.0064 + 0.0144.
  EXPECT_NEAR(rollout_cost(ops, scalar(2.0)), 1.0208, 1e-15);
  EXPECT_NEAR(plug_in_cost(ops, scalar(2.0)), 1.04 - 0.16 / 5.0, 1e-15);
}

TEST(Bounds, ScalarHandValues) {
  const BoundInputs in = scalar_inputs();
  const double tr = 0.01;
  const double factor = tr + 2.0 * std::sqrt(tr);
  EXPECT_NEAR(bound_least_squares(in, tr), 0.04 * 2.0 * factor, 1e-15);
  const LagrangeBound lb = bound_lagrange(in, tr);
  ASSERT_TRUE(lb.assumption_holds);
  ASSERT_TRUE(lb.value.has_value());
  EXPECT_NEAR(*lb.value, 0.2 * 0.2 * 2.0 * factor, 1e-15);
  EXPECT_EQ(bound_least_squares(in, 0.0), 0.0);
  EXPECT_EQ(bound_lagrange(in, 0.0).value.value(), 0.0);
  EXPECT_THROW(bound_least_squares(in, -1.0), DomainError);
}

TEST(Bounds, MonotoneInTrace) {
  const BoundOperators ops = assemble_operators(random_inputs(1));
  EXPECT_LT(bound_least_squares(ops, 0.005), bound_least_squares(ops, 0.01));
}

TEST(Bounds, LagrangeAssumptionFailure) {
  // A negative-definite L_QG; valid costs cannot produce one (see below).
  BoundOperators ops = assemble_operators(scalar_inputs());
  ops.l_qg = -ops.l_qg;
  const LagrangeBound lb = bound_lagrange(ops, 0.01);
  EXPECT_FALSE(lb.assumption_holds);
  EXPECT_FALSE(lb.value.has_value());
  EXPECT_LT(lb.min_symmetric_eigenvalue, 0.0);
}

TEST(Bounds, LagrangeAssumptionHoldsForDefiniteCosts) {
  // G = (I - L)^{-1} for the strictly lower lag operator L and I - L_u = (I - L)^T,
  // so L_QG^{-1} (I - L_u) = (I - L) Qbar^{-1} (I - L)^T.
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = testing::random_instance(rng, {.t_min = 2, .t_max = 8, .terminal_equals_stage = trial % 2 == 0});
    const BoundInputs in{inst.model, inst.cost, inst.x0, inst.horizon, 0.1, 10, 1};
    const BoundOperators ops = assemble_operators(in);
    const int n = ops.state_dim, t = ops.horizon;
    const Mat lower = ops.l_u.transpose();
    Mat q_inv = Mat::Zero(t * n, t * n);
    for (int r = 0; r < t; ++r) {
      q_inv.block(r * n, r * n, n, n) = (r == t - 1 ? inst.cost.q_f() : inst.cost.q()).inverse();
    }
    const Mat id = Mat::Identity(t * n, t * n);
    const Mat expect = (id - lower) * q_inv * (id - lower).transpose();
    const Mat m = ops.l_qg.partialPivLu().solve(id - ops.l_u);
    EXPECT_LE((m - expect).norm(), 1e-9 * (1.0 + expect.norm()));
    const LagrangeBound lb = bound_lagrange(ops, 0.01);
    EXPECT_TRUE(lb.assumption_holds);
    EXPECT_GT(lb.min_symmetric_eigenvalue, 0.0);
  }
}

TEST(Bounds, SingularLqg) {
  const BoundInputs in{FoltiModel(scalar(0.3), scalar(1.0), FracOrder({0.5})),
                       CostSpec(scalar(0.0), scalar(1.0), scalar(0.0)), Vec::Ones(1), 2, 0.1, 10, 1};
  EXPECT_THROW(bound_lagrange(in, 0.01), SolverError);
}

TEST(Inputs, Validation) {
  BoundInputs in = scalar_inputs();
  in.p = 2;
  EXPECT_THROW(in.validate(), ConfigError);
  EXPECT_THROW(monte_carlo_gap(in, {10}, 5, 1), ConfigError);
  in = scalar_inputs();
  in.x0 = Vec::Ones(2);
  EXPECT_THROW(in.validate(), ConfigError);
  in = scalar_inputs();
  in.sigma_w = -1.0;
  EXPECT_THROW(in.validate(), ConfigError);
  in = scalar_inputs();
  EXPECT_THROW(monte_carlo_gap(in, {}, 5, 1), ConfigError);
  EXPECT_THROW(monte_carlo_gap(in, {0}, 5, 1), ConfigError);
  EXPECT_THROW(monte_carlo_gap(in, {10}, 0, 1), ConfigError);
}

TEST(MonteCarlo, NoNoiseMeansNoGap) {
  const ComplexityReport rep = monte_carlo_gap(random_inputs(2, 0.0), {10, 100}, 20, 3);
  for (const GapRow& row : rep.rows) {
    EXPECT_EQ(row.gap, 0.0);
    EXPECT_EQ(row.rollout_gap, 0.0);
    EXPECT_EQ(row.bound_ls, 0.0);
    EXPECT_EQ(row.replicates, 20);
  }
  EXPECT_FALSE(rep.loglog_slope.has_value());
}

TEST(MonteCarlo, GapStaysUnderBound) {
  const BoundInputs in = random_inputs(4);
  const ComplexityReport rep = monte_carlo_gap(in, {10, 50, 250}, 300, 5);
  EXPECT_NEAR(rep.optimal_cost,
              solve_control(in.model, in.cost, in.x0, in.horizon, ControlMethod::kLeastSquares).cost,
              1e-9 * (1.0 + rep.optimal_cost));
  for (const GapRow& row : rep.rows) {
    EXPECT_GT(row.gap, 0.0);
    EXPECT_LE(row.gap, row.bound_ls + 2.0 * row.gap_std_error);
    EXPECT_EQ(row.failures, 0);
  }
  EXPECT_GT(rep.rows.front().gap, rep.rows.back().gap);
}

TEST(MonteCarlo, IndependentOfWorkerCount) {
  const BoundInputs in = random_inputs(6);
  const ComplexityReport a = monte_carlo_gap(in, {10, 20}, 40, 7, 1);
  const ComplexityReport b = monte_carlo_gap(in, {10, 20}, 40, 7, 4);
  EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
  EXPECT_EQ(report_to_csv(a), report_to_csv(b));
}

TEST(Report, Formats) {
  const ComplexityReport rep = monte_carlo_gap(random_inputs(8), {10, 20}, 10, 1);
  const std::string csv = report_to_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,gap,std_error,bound_ls,bound_lagrange,trace_kb");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const nlohmann::json j = report_to_json(rep);
  ASSERT_EQ(j.at("rows").size(), 2u);
  EXPECT_EQ(j.at("rows")[1].at("N"), 20);
  EXPECT_TRUE(j.contains("loglog_slope"));
}

TEST(LogLog, Slope) {
  EXPECT_NEAR(loglog_slope({1, 10, 100}, {1, 0.1, 0.01}), -1.0, 1e-14);
  EXPECT_NEAR(loglog_slope({4, 16}, {2, 4}), 0.5, 1e-14);
  EXPECT_THROW(loglog_slope({1}, {1}), DomainError);
  EXPECT_THROW(loglog_slope({1, 2}, {1, 0}), DomainError);
  EXPECT_THROW(loglog_slope({2, 2}, {1, 3}), DomainError);
}

}  // namespace
}  // namespace folti
