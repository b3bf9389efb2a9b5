// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "specdiff/targets.hpp"

using namespace specdiff;

namespace {

const GaussianModel kModel(PowerLaw(10.0, 1.5), Shape{1, 1, 16, 16}, TransformKind::DCT);

Schedule two_stage() {
  return make_schedule({0.5, 1.0}, {5}, {16, 16}, SolverGrid::shifted(10));
}

}  // namespace

TEST_CASE("stage bounds and assignment") {
  const Schedule s = two_stage();
  CHECK(stage_start_time(s, 0) == 1.0);
  CHECK(stage_end_time(s, 0) == s.transitions[0]);
  CHECK(stage_start_time(s, 1) == s.aligned_times[0]);
  CHECK(stage_end_time(s, 1) == 0.0);
  CHECK(assign_stage(1.0, s) == 0);
  CHECK(assign_stage(s.transitions[0], s) == 0);
  CHECK(assign_stage(std::nextafter(s.transitions[0], 0.0), s) == 1);
  CHECK(assign_stage(0.0, s) == 1);
  CHECK_THROWS_AS(stage_start_time(s, 2), Error);
}

TEST_CASE("stage samples lie on a straight path") {
  const Schedule s = two_stage();
  const Field x0 = sample_clean(kModel, 1);
  for (std::size_t stage : {0u, 1u}) {
    const double ts = stage_start_time(s, stage), te = stage_end_time(s, stage);
    for (double u : {0.1, 0.5, 0.9}) {
      const double t = te + u * (ts - te);
      const StageSample e = make_stage_sample_in_stage(x0, t, stage, s, TransformKind::DCT, 9);
      Field want = ((t - te) / (ts - te)) * e.x_tilde;
      want.axpy((ts - t) / (ts - te), e.x_end);
      CHECK(testing::max_diff(e.input, want) < 1e-12);
      CHECK(e.input.grid() == s.stage_grid(stage));
    }
  }
  // Stage 2 begins where an expanded stage-1 state would.
  const StageSample late = make_stage_sample_in_stage(x0, 0.3, 1, s, TransformKind::DCT, 9);
  const StageSample early =
      make_stage_sample_in_stage(x0, s.transitions[0], 0, s, TransformKind::DCT, 9);
  CHECK(late.x_tilde.grid() == Grid{16, 16});
  CHECK(early.x_end.grid() == Grid{8, 8});
  CHECK_THROWS_AS(make_stage_sample_in_stage(x0, 0.95, 1, s, TransformKind::DCT, 9), Error);
  CHECK_THROWS_AS(make_stage_sample(x0, 1.0, s, TransformKind::DCT, 9), Error);
}

TEST_CASE("single stage reduces to the standard target") {
  const Schedule s = make_schedule({1.0}, {}, {16, 16}, SolverGrid::shifted(10));
  const Field x0 = sample_clean(kModel, 2);
  const StageSample e = make_stage_sample(x0, 0.37, s, TransformKind::DCT, 4);
  CHECK(testing::max_diff(e.target, e.noise - x0) == 0.0);
  Field want = 0.63 * x0;
  want.axpy(0.37, e.noise);
  CHECK(testing::max_diff(e.input, want) < 1e-15);
  CHECK(testing::max_diff(e.clean, x0) == 0.0);
}

TEST_CASE("analytic stage gains") {
  const Schedule s = two_stage();
  const auto g0 = analytic_stage_gain(kModel, s, 0, 0.8);
  const auto p0 = kModel.power_map({8, 8});
  for (std::size_t k = 0; k < 64; ++k) CHECK(g0[k] == optimal_gain(p0[k], 0.8));
  // New-band gain is the least-squares slope of the new-band target.
  const auto g1 = analytic_stage_gain(kModel, s, 1, 0.3);
  const auto p1 = kModel.power_map();
  const auto mask = spectral::low_band_mask({8, 8}, {16, 16}, TransformKind::DCT);
  const std::size_t k = 15 * 16 + 15;
  REQUIRE(!mask[k]);
  double sxy = 0.0, sxx = 0.0;
  for (std::uint64_t i = 0; i < 4000; ++i) {
    const StageSample e =
        make_stage_sample_in_stage(sample_clean(kModel, 100 + i), 0.3, 1, s, TransformKind::DCT, i);
    const double x = spectral::forward(e.input, TransformKind::DCT).coeffs()[k].real();
    const double v = spectral::forward(e.target, TransformKind::DCT).coeffs()[k].real();
    sxy += x * v;
    sxx += x * x;
  }
  CHECK(sxy / sxx == doctest::Approx(g1[k]).epsilon(0.05));
  CHECK(g1[0] == optimal_gain(p1[0], 0.3));
  (void)p1;
}

TEST_CASE("toy model embedding and training") {
  const Schedule s = two_stage();
  ToyNet net(s, TransformKind::DCT);
  CHECK(net.stages() == 2);
  CHECK(net.knots(0).size() == 4);  // step 0 departs t = 1
  CHECK(net.knots(1).size() == 5);
  double wsum = 0.0;
  for (auto [m, w] : net.embedding(1, 0.2)) wsum += w;
  CHECK(wsum == doctest::Approx(1.0));
  CHECK(net.embedding(0, net.knots(0)[1]).front().second == doctest::Approx(1.0));
  CHECK(testing::max_diff(net.evaluate(testing::random_field(Shape{1, 1, 8, 8}, 1), 0.9),
                          Field(Shape{1, 1, 8, 8})) == 0.0);
  CHECK_THROWS_AS(net.evaluate(testing::random_field(Shape{1, 1, 4, 4}, 1), 0.9), Error);

  TrainOptions opt;
  opt.steps = 150;
  opt.batch = 16;
  const TrainResult r = train_toy(net, kModel, s, opt, 3);
  CHECK(r.loss_curve.size() == 150);
  CHECK(r.loss_curve.back() < r.loss_curve.front());
  CHECK(loss_curve_to_csv(r).rfind("step,loss\n", 0) == 0);

  net.frozen = true;
  const auto before = net.gains(0);
  train_toy(net, kModel, s, opt, 4);
  CHECK(net.gains(0) == before);
  opt.lr = 1e6;
  opt.optimizer = Optimizer::SGD;
  net.frozen = false;
  CHECK_THROWS_AS(train_toy(net, kModel, s, opt, 5), Error);
}
