#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <json.hpp>

#include "afkan/afkan.hpp"
#include "properties.hpp"

namespace afkan {
namespace {

using afkan::testing::synthetic_dataset;

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  const Var loss = cross_entropy(Var::constant(Tensor(Shape{3, 10}, 0.7)), {0, 4, 9});
  EXPECT_NEAR(loss.value().item(), std::log(10.0), 1e-12);
  EXPECT_NEAR(loss.value().item(), 2.302585, 1e-6);
}

TEST(CrossEntropy, SaturatedLogitsGiveZero) {
  Tensor z(Shape{2, 10});
  z[0 * 10 + 3] = 100;
  z[1 * 10 + 7] = 100;
  const double loss = cross_entropy(Var::constant(z), {3, 7}).value().item();
  EXPECT_GE(loss, 0.0);
  EXPECT_LT(loss, 1e-40);
  z[0 * 10 + 3] = 1000;
  EXPECT_TRUE(std::isfinite(cross_entropy(Var::constant(z), {0, 7}).value().item()));
}

TEST(CrossEntropy, GradientMatchesDifferences) {
  Rng rng(1);
  Tensor zv(Shape{4, 5});
  for (auto& v : zv.data()) v = rng.uniform(-3, 3);
  Var z = Var::parameter(zv);
  EXPECT_LT(grad_check([&] { return cross_entropy(z, {0, 4, 2, 2}); }, z, 1e-5), 1e-7);
}

TEST(CrossEntropy, RejectsBadLabelsAndShapes) {
  const Var z = Var::constant(Tensor(Shape{2, 3}));
  EXPECT_THROW(cross_entropy(z, {0, 3}), ValueError);
  EXPECT_THROW(cross_entropy(z, {0, -1}), ValueError);
  EXPECT_THROW(cross_entropy(z, {0}), ShapeError);
  EXPECT_THROW(cross_entropy(Var::constant(Tensor(Shape{3})), {0, 1, 2}), ShapeError);
}

TEST(AdamWUpdate, FirstStepExamples) {
  AdamWConfig cfg;
  cfg.weight_decay = 0;
  Tensor theta = Tensor::vector({1.0}), m(Shape{1}), v(Shape{1});
  adamw_update(theta, Tensor::vector({1.0}), m, v, 1, 1e-3, cfg);
  EXPECT_NEAR(theta[0], 1.0 - 1e-3 / (1.0 + 1e-8), 1e-15);

  theta = Tensor::vector({0.7});
  m = Tensor(Shape{1});
  v = Tensor(Shape{1});
  adamw_update(theta, Tensor(Shape{1}), m, v, 1, 1e-3, cfg);
  EXPECT_EQ(theta[0], 0.7);

  cfg.weight_decay = 1e-4;
  theta = Tensor::vector({0.7});
  adamw_update(theta, Tensor(Shape{1}), m, v, 1, 1e-3, cfg);
  EXPECT_EQ(theta[0], 0.7 * (1.0 - 1e-3 * 1e-4));
}

TEST(AdamWUpdate, FirstStepMovesAgainstGradientSign) {
  Rng rng(2);
  AdamWConfig cfg;
  cfg.weight_decay = 0;
  for (int i = 0; i < 200; ++i) {
    const double g = rng.uniform(-5, 5);
    if (g == 0) continue;
    Tensor theta = Tensor::vector({rng.uniform(-1, 1)});
    const double before = theta[0];
    Tensor m(Shape{1}), v(Shape{1});
    adamw_update(theta, Tensor::vector({g}), m, v, 1, 1e-2, cfg);
    EXPECT_EQ(std::signbit(theta[0] - before), !std::signbit(g));
  }
}

TEST(AdamWUpdate, RejectsMismatchAndZeroStep) {
  Tensor theta(Shape{2}), m(Shape{2}), v(Shape{2});
  EXPECT_THROW(adamw_update(theta, Tensor(Shape{3}), m, v, 1, 1e-3, {}), ShapeError);
  EXPECT_THROW(adamw_update(theta, Tensor(Shape{2}), m, v, 0, 1e-3, {}), ValueError);
}

TEST(AdamWOptimizer, StepsAllParametersAndCounts) {
  Var a = Var::parameter(Tensor::vector({1.0, -2.0}));
  Var b = Var::parameter(Tensor::vector({0.5}));
  AdamW opt({{"a", a}, {"b", b}});
  backward(sum_all(a * a) + sum_all(b));
  opt.step(1e-2);
  EXPECT_EQ(opt.steps(), 1u);
  EXPECT_LT(a.value()[0], 1.0);
  EXPECT_GT(a.value()[1], -2.0);
  EXPECT_LT(b.value()[0], 0.5);
  EXPECT_NEAR(opt.first_moment(0)[0], 0.1 * 2.0, 1e-15);
  opt.zero_grad();
  EXPECT_EQ(a.grad()[0], 0.0);
}

TEST(LrSchedule, Examples) {
  EXPECT_EQ(lr_schedule(1e-3, 0.8, 0), 1e-3);
  EXPECT_NEAR(lr_schedule(1e-3, 0.8, 1), 8e-4, 1e-18);
  EXPECT_NEAR(lr_schedule(1e-3, 0.8, 25), 3.78e-6, 1e-8);
}

TEST(Metrics, Examples) {
  const Metrics perfect = metrics({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(perfect.macro_f1, 1.0);
  const Metrics zeros = metrics({0, 0, 0, 0}, {0, 0, 1, 1}, 2);
  EXPECT_EQ(zeros.accuracy, 0.5);
  EXPECT_NEAR(zeros.macro_f1, 1.0 / 3.0, 1e-15);
  const Metrics empty_class = metrics({0, 1}, {0, 1}, 3);
  EXPECT_NEAR(empty_class.macro_f1, 2.0 / 3.0, 1e-15);
  EXPECT_THROW(metrics({0}, {0, 1}, 2), ShapeError);
}

TEST(Metrics, ArgmaxPicksFirstMaximum) {
  EXPECT_EQ(argmax_rows(Tensor::matrix({{0, 3, 3}, {5, 1, 2}})), (std::vector<int>{1, 0}));
}

TEST(Aggregation, MeanStdUsesSampleDeviation) {
  const Stat s = mean_std({1, 2, 3, 4});
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(mean_std({7}).std, 0.0);
}

TEST(Aggregation, UsesFinalEpochOfEachRun) {
  RunHistory a, b;
  a.epochs = {EpochRecord{0, 0, 1e-3, 1.0, 0.5, 0.5, 0.5, 2.0},
              EpochRecord{0, 1, 8e-4, 0.5, 0.8, 0.9, 0.85, 3.0}};
  b.epochs = {EpochRecord{1, 0, 1e-3, 1.0, 0.5, 0.5, 0.5, 1.0},
              EpochRecord{1, 1, 8e-4, 0.3, 0.9, 0.8, 0.75, 1.0}};
  const Aggregate agg = aggregate({a, b});
  EXPECT_EQ(agg.runs, 2u);
  EXPECT_NEAR(agg.val_acc.mean, 0.85, 1e-15);
  EXPECT_NEAR(agg.val_acc.std, std::sqrt(0.005), 1e-15);
  EXPECT_NEAR(agg.seconds.mean, 3.5, 1e-15);
  const auto j = nlohmann::json::parse(agg.to_json());
  EXPECT_TRUE(j["aggregate"].get<bool>());
  EXPECT_NEAR(j["macro_f1"]["mean"].get<double>(), 0.8, 1e-15);
}

TrainConfig small_config(Variant v) {
  TrainConfig cfg;
  cfg.model.variant = v;
  cfg.model.widths = {16, 6, 3};
  cfg.epochs = 3;
  cfg.lr = 1e-2;
  cfg.batch_size = 16;
  cfg.runs = 1;
  cfg.eval_batch = 50;
  return cfg;
}

void strip_seconds(RunHistory& h) {
  for (auto& e : h.epochs) e.seconds = 0;
}

bool same_records(const EpochRecord& a, const EpochRecord& b) {
  return a.to_json() == b.to_json();
}

TEST(Training, DeterministicGivenSeed) {
  const Dataset train = synthetic_dataset(120, 16, 3, 1);
  const Dataset test = synthetic_dataset(60, 16, 3, 2);
  const TrainConfig cfg = small_config(Variant::kAfKan);
  auto run = [&] {
    Model m(cfg.model);
    RunHistory h = train_model(m, cfg, train, test, 4);
    strip_seconds(h);
    return h;
  };
  const RunHistory a = run();
  const RunHistory b = run();
  ASSERT_EQ(a.epochs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_TRUE(same_records(a.epochs[i], b.epochs[i]));
}

TEST(Training, LossDecreasesAndLearns) {
  const Dataset train = synthetic_dataset(300, 16, 3, 3);
  const Dataset test = synthetic_dataset(150, 16, 3, 4);
  for (auto v : {Variant::kAfKan, Variant::kReluKan, Variant::kMlp, Variant::kBasisKan}) {
    const TrainConfig cfg = small_config(v);
    Model m(cfg.model);
    const RunHistory h = train_model(m, cfg, train, test, 0);
    EXPECT_LT(h.epochs.back().train_loss, h.epochs.front().train_loss) << variant_name(v);
    EXPECT_GT(h.epochs.back().val_acc, 0.6) << variant_name(v);
  }
}

TEST(Training, ShorterRunIsPrefixOfLongerRun) {
  const Dataset train = synthetic_dataset(100, 16, 3, 5);
  const Dataset test = synthetic_dataset(50, 16, 3, 6);
  TrainConfig cfg = small_config(Variant::kAfKan);
  cfg.epochs = 2;
  Model m2(cfg.model);
  RunHistory short_run = train_model(m2, cfg, train, test, 9);
  cfg.epochs = 4;
  Model m4(cfg.model);
  RunHistory long_run = train_model(m4, cfg, train, test, 9);
  strip_seconds(short_run);
  strip_seconds(long_run);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_TRUE(same_records(short_run.epochs[i], long_run.epochs[i])) << "epoch " << i;
  }
}

TEST(Training, NonFiniteLossIsNumericError) {
  Dataset train = synthetic_dataset(40, 16, 3, 7);
  const Dataset test = synthetic_dataset(20, 16, 3, 8);
  const TrainConfig cfg = small_config(Variant::kMlp);
  Model m(cfg.model);
  for (const auto& p : m.parameters()) {
    for (auto& v : p.var.node()->value.data()) v = std::numeric_limits<double>::quiet_NaN();
  }
  EXPECT_THROW(train_model(m, cfg, train, test, 0), NumericError);
}

TEST(Training, SkippingTrainEvalWritesNull) {
  const Dataset train = synthetic_dataset(40, 16, 3, 9);
  const Dataset test = synthetic_dataset(20, 16, 3, 10);
  TrainConfig cfg = small_config(Variant::kMlp);
  cfg.epochs = 1;
  cfg.eval_train = false;
  Model m(cfg.model);
  const RunHistory h = train_model(m, cfg, train, test, 0);
  EXPECT_TRUE(std::isnan(h.epochs[0].train_acc));
  const auto j = nlohmann::json::parse(h.epochs[0].to_json());
  EXPECT_TRUE(j["train_acc"].is_null());
  EXPECT_TRUE(j["val_acc"].is_number());
}

TEST(Training, FeatureMismatchRejected) {
  const Dataset train = synthetic_dataset(20, 8, 3, 11);
  const TrainConfig cfg = small_config(Variant::kMlp);
  Model m(cfg.model);
  EXPECT_THROW(train_model(m, cfg, train, train, 0), ShapeError);
}

TEST(MultiRun, SeedsFollowRunIndex) {
  const Dataset train = synthetic_dataset(60, 16, 3, 12);
  const Dataset test = synthetic_dataset(30, 16, 3, 13);
  TrainConfig cfg = small_config(Variant::kMlp);
  cfg.epochs = 1;
  cfg.seed = 10;
  std::vector<std::uint64_t> model_seeds;
  const MultiRunResult r = multi_run(cfg, train, test, 3, {}, [&](std::size_t, Model& m) {
    model_seeds.push_back(m.spec().seed);
  });
  ASSERT_EQ(r.histories.size(), 3u);
  EXPECT_EQ(model_seeds, (std::vector<std::uint64_t>{10, 11, 12}));
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.histories[i].seed, 10 + i);
  EXPECT_EQ(r.summary.runs, 3u);
  EXPECT_THROW(multi_run(cfg, train, test, 0), ValueError);
}

}  // namespace
}  // namespace afkan
