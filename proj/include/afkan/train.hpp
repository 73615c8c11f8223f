#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "afkan/data.hpp"
#include "afkan/model.hpp"

namespace afkan {

// Mean over the batch of -log softmax(logits)[label], log-sum-exp stabilized.
Var cross_entropy(const Var& logits, const std::vector<int>& labels);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;
};

// One AdamW update on a single tensor. `step` is the 1-based step index.
// Decay is decoupled: theta -= lr * wd * theta before the adaptive step.
void adamw_update(Tensor& theta, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t step,
                  double lr, const AdamWConfig& cfg);

class AdamW {
 public:
  AdamW(std::vector<NamedParam> params, AdamWConfig cfg = {});

  // Applies one step with learning rate `lr` using the current gradients.
  void step(double lr);
  void zero_grad();

  std::uint64_t steps() const { return step_; }
  const Tensor& first_moment(std::size_t i) const { return m_.at(i); }
  const Tensor& second_moment(std::size_t i) const { return v_.at(i); }

 private:
  std::vector<NamedParam> params_;
  AdamWConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t step_ = 0;
};

// base_lr * gamma^epoch.
double lr_schedule(double base_lr, double gamma, std::size_t epoch);

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

Metrics metrics(const std::vector<int>& predicted, const std::vector<int>& truth,
                std::size_t num_classes);

std::vector<int> argmax_rows(const Tensor& logits);

struct Evaluation {
  double loss = 0.0;
  Metrics metrics;
};

// Inference-mode pass over a whole dataset in chunks of `batch`.
Evaluation evaluate(Model& model, const Dataset& ds, std::size_t batch = 1000);

struct TrainConfig {
  ModelSpec model;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double gamma = 0.8;
  std::size_t batch_size = 64;
  std::size_t epochs = 25;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  std::size_t eval_batch = 1000;
  // Full post-epoch pass over the train set for train_acc; NaN when off.
  bool eval_train = true;

  void validate() const;
};

struct EpochRecord {
  std::size_t run = 0;
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;  // mean minibatch loss over the epoch
  double train_acc = 0.0;   // full pass over the train set after the epoch
  double val_acc = 0.0;
  double macro_f1 = 0.0;
  double seconds = 0.0;

  std::string to_json() const;
};

struct RunHistory {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<EpochRecord> epochs;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains `model` in place. The batch order is keyed by `run_seed`.
RunHistory train_model(Model& model, const TrainConfig& cfg, const Dataset& train,
                       const Dataset& test, std::uint64_t run_seed, std::size_t run_id = 0,
                       const EpochCallback& on_epoch = {});

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 when n == 1
};

Stat mean_std(const std::vector<double>& values);

struct Aggregate {
  std::size_t runs = 0;
  Stat train_loss;
  Stat train_acc;
  Stat val_acc;
  Stat macro_f1;
  Stat seconds;  // total wall-clock per run

  std::string to_json() const;
};

// Statistics over the final epoch of each run.
Aggregate aggregate(const std::vector<RunHistory>& runs);

struct MultiRunResult {
  std::vector<RunHistory> histories;
  Aggregate summary;
};

// Runs seeds cfg.seed .. cfg.seed + n - 1; each run builds its model with
// spec.seed = run seed. `on_model` receives every trained model.
MultiRunResult multi_run(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
                         std::size_t n, const EpochCallback& on_epoch = {},
                         const std::function<void(std::size_t, Model&)>& on_model = {});

}  // namespace afkan
