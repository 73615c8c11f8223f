#include "afkan/train.hpp"

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <numeric>

namespace afkan {

Var cross_entropy(const Var& logits, const std::vector<int>& labels) {
  if (logits.rank() != 2) {
    throw ShapeError("cross_entropy expects (B, C) logits, got " + shape_str(logits.shape()));
  }
  const std::size_t B = logits.shape()[0];
  const std::size_t C = logits.shape()[1];
  if (labels.size() != B) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for batch of " +
                     std::to_string(B));
  }
  for (std::size_t b = 0; b < B; ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= C) {
      throw ValueError("cross_entropy: label " + std::to_string(labels[b]) + " at row " +
                       std::to_string(b) + " outside [0, " + std::to_string(C) + ")");
    }
  }
  const auto z = logits.value().data();
  // Row-wise softmax is kept for the backward rule.
  auto probs = std::make_shared<std::vector<double>>(B * C);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    const double* row = z.data() + b * C;
    double m = row[0];
    for (std::size_t c = 1; c < C; ++c) m = std::max(m, row[c]);
    double s = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      const double e = std::exp(row[c] - m);
      (*probs)[b * C + c] = e;
      s += e;
    }
    for (std::size_t c = 0; c < C; ++c) (*probs)[b * C + c] /= s;
    total += (m + std::log(s)) - row[labels[b]];
  }
  const double inv_b = 1.0 / static_cast<double>(B);
  return make_result(Tensor::scalar(total * inv_b), {logits}, "cross_entropy",
                     [probs, labels, B, C, inv_b](Node& self) {
                       const double g = self.grad[0] * inv_b;
                       auto& gx = self.inputs[0]->grad_buffer();
                       for (std::size_t b = 0; b < B; ++b) {
                         for (std::size_t c = 0; c < C; ++c) {
                           const double onehot = static_cast<int>(c) == labels[b] ? 1.0 : 0.0;
                           gx[b * C + c] += g * ((*probs)[b * C + c] - onehot);
                         }
                       }
                     });
}

void adamw_update(Tensor& theta, const Tensor& grad, Tensor& m, Tensor& v, std::uint64_t step,
                  double lr, const AdamWConfig& cfg) {
  if (grad.shape() != theta.shape() || m.shape() != theta.shape() || v.shape() != theta.shape()) {
    throw ShapeError("adamw: parameter " + shape_str(theta.shape()) + ", gradient " +
                     shape_str(grad.shape()) + ", moments " + shape_str(m.shape()) + "/" +
                     shape_str(v.shape()) + " disagree");
  }
  if (step == 0) throw ValueError("adamw: step index is 1-based");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  const double decay = 1.0 - lr * cfg.weight_decay;
  auto th = theta.data();
  auto g = grad.data();
  auto mm = m.data();
  auto vv = v.data();
  for (std::size_t i = 0; i < th.size(); ++i) {
    th[i] *= decay;
    mm[i] = cfg.beta1 * mm[i] + (1.0 - cfg.beta1) * g[i];
    vv[i] = cfg.beta2 * vv[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double m_hat = mm[i] / bc1;
    const double v_hat = vv[i] / bc2;
    th[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

AdamW::AdamW(std::vector<NamedParam> params, AdamWConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.var.shape());
    v_.emplace_back(p.var.shape());
  }
}

void AdamW::step(double lr) {
  ++step_;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i].var;
    adamw_update(p.mutable_value(), p.grad(), m_[i], v_[i], step_, lr, cfg_);
  }
}

void AdamW::zero_grad() {
  for (auto& p : params_) p.var.zero_grad();
}

double lr_schedule(double base_lr, double gamma, std::size_t epoch) {
  return base_lr * std::pow(gamma, static_cast<double>(epoch));
}

Metrics metrics(const std::vector<int>& predicted, const std::vector<int>& truth,
                std::size_t num_classes) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("metrics: " + std::to_string(predicted.size()) + " predictions vs " +
                     std::to_string(truth.size()) + " labels");
  }
  Metrics out;
  if (truth.empty()) return out;
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::size_t correct = 0;
  auto in_range = [&](int c) { return c >= 0 && static_cast<std::size_t>(c) < num_classes; };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int p = predicted[i];
    const int t = truth[i];
    if (p == t) {
      ++correct;
      if (in_range(t)) ++tp[t];
    } else {
      if (in_range(p)) ++fp[p];
      if (in_range(t)) ++fn[t];
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double p_den = static_cast<double>(tp[c] + fp[c]);
    const double r_den = static_cast<double>(tp[c] + fn[c]);
    const double precision = p_den > 0 ? static_cast<double>(tp[c]) / p_den : 0.0;
    const double recall = r_den > 0 ? static_cast<double>(tp[c]) / r_den : 0.0;
    if (precision + recall > 0) f1_sum += 2.0 * precision * recall / (precision + recall);
  }
  out.macro_f1 = num_classes > 0 ? f1_sum / static_cast<double>(num_classes) : 0.0;
  return out;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const std::size_t B = logits.dim(0);
  const std::size_t C = logits.dim(1);
  std::vector<int> out(B);
  auto z = logits.data();
  for (std::size_t b = 0; b < B; ++b) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < C; ++c) {
      if (z[b * C + c] > z[b * C + best]) best = c;
    }
    out[b] = static_cast<int>(best);
  }
  return out;
}

Evaluation evaluate(Model& model, const Dataset& ds, std::size_t batch) {
  if (batch == 0) throw ValueError("evaluate: batch must be positive");
  NoGradGuard guard;
  Evaluation ev;
  std::vector<int> predicted;
  predicted.reserve(ds.size());
  std::size_t num_classes = model.spec().widths.back();
  double loss_sum = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.size(); start += batch) {
    const std::size_t stop = std::min(ds.size(), start + batch);
    idx.resize(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const Batch b = gather(ds, idx);
    const Var logits = model.forward(Var::constant(b.images), false);
    loss_sum += cross_entropy(logits, b.labels).value().item() * static_cast<double>(idx.size());
    const auto pred = argmax_rows(logits.value());
    predicted.insert(predicted.end(), pred.begin(), pred.end());
  }
  ev.loss = ds.size() > 0 ? loss_sum / static_cast<double>(ds.size()) : 0.0;
  ev.metrics = metrics(predicted, ds.labels, num_classes);
  return ev;
}

void TrainConfig::validate() const {
  model.validate();
  if (!(lr > 0)) throw ValueError("lr must be positive");
  if (weight_decay < 0) throw ValueError("weight_decay must be non-negative");
  if (!(gamma > 0 && gamma <= 1)) throw ValueError("gamma must lie in (0, 1]");
  if (batch_size == 0) throw ValueError("batch_size must be >= 1");
  if (epochs == 0) throw ValueError("epochs must be >= 1");
  if (runs == 0) throw ValueError("runs must be >= 1");
  if (eval_batch == 0) throw ValueError("eval_batch must be >= 1");
}

std::string EpochRecord::to_json() const {
  nlohmann::ordered_json j;
  j["run"] = run;
  j["epoch"] = epoch;
  j["lr"] = lr;
  j["train_loss"] = train_loss;
  if (std::isfinite(train_acc)) {
    j["train_acc"] = train_acc;
  } else {
    j["train_acc"] = nullptr;
  }
  j["val_acc"] = val_acc;
  j["macro_f1"] = macro_f1;
  j["seconds"] = seconds;
  return j.dump();
}

RunHistory train_model(Model& model, const TrainConfig& cfg, const Dataset& train,
                       const Dataset& test, std::uint64_t run_seed, std::size_t run_id,
                       const EpochCallback& on_epoch) {
  cfg.validate();
  if (train.size() == 0) throw DataError("training set is empty");
  const std::size_t in = model.spec().widths.front();
  if (train.features() != in || test.features() != in) {
    throw ShapeError("dataset has " + std::to_string(train.features()) +
                     " features, model expects " + std::to_string(in));
  }
  AdamWConfig opt_cfg;
  opt_cfg.weight_decay = cfg.weight_decay;
  AdamW opt(model.parameters(), opt_cfg);
  const BatchPlan plan{run_seed, cfg.batch_size};

  RunHistory history;
  history.run = run_id;
  history.seed = run_seed;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double lr = lr_schedule(cfg.lr, cfg.gamma, epoch);
    const auto groups = batch_indices(train.size(), plan, epoch);
    double loss_sum = 0.0;
    for (std::size_t bi = 0; bi < groups.size(); ++bi) {
      const Batch batch = gather(train, groups[bi]);
      opt.zero_grad();
      const Var logits = model.forward(Var::constant(batch.images), true);
      const Var loss = cross_entropy(logits, batch.labels);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss " + std::to_string(value) + " in run " +
                           std::to_string(run_id) + ", epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(bi));
      }
      backward(loss);
      opt.step(lr);
      loss_sum += value;
    }
    EpochRecord rec;
    rec.run = run_id;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(groups.size());
    rec.train_acc = cfg.eval_train ? evaluate(model, train, cfg.eval_batch).metrics.accuracy
                                   : std::numeric_limits<double>::quiet_NaN();
    const Evaluation val = evaluate(model, test, cfg.eval_batch);
    rec.val_acc = val.metrics.accuracy;
    rec.macro_f1 = val.metrics.macro_f1;
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

Stat mean_std(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::string Aggregate::to_json() const {
  auto stat = [](const Stat& s) {
    nlohmann::ordered_json j;
    j["mean"] = s.mean;
    j["std"] = s.std;
    return j;
  };
  nlohmann::ordered_json j;
  j["aggregate"] = true;
  j["runs"] = runs;
  j["train_loss"] = stat(train_loss);
  j["train_acc"] = stat(train_acc);
  j["val_acc"] = stat(val_acc);
  j["macro_f1"] = stat(macro_f1);
  j["seconds"] = stat(seconds);
  return j.dump();
}

Aggregate aggregate(const std::vector<RunHistory>& runs) {
  Aggregate a;
  a.runs = runs.size();
  std::vector<double> loss, tacc, vacc, f1, secs;
  for (const auto& r : runs) {
    if (r.epochs.empty()) continue;
    const auto& last = r.epochs.back();
    loss.push_back(last.train_loss);
    tacc.push_back(last.train_acc);
    vacc.push_back(last.val_acc);
    f1.push_back(last.macro_f1);
    double total = 0.0;
    for (const auto& e : r.epochs) total += e.seconds;
    secs.push_back(total);
  }
  a.train_loss = mean_std(loss);
  a.train_acc = mean_std(tacc);
  a.val_acc = mean_std(vacc);
  a.macro_f1 = mean_std(f1);
  a.seconds = mean_std(secs);
  return a;
}

MultiRunResult multi_run(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
                         std::size_t n, const EpochCallback& on_epoch,
                         const std::function<void(std::size_t, Model&)>& on_model) {
  if (n == 0) throw ValueError("multi_run: n must be >= 1");
  MultiRunResult result;
  for (std::size_t r = 0; r < n; ++r) {
    ModelSpec spec = cfg.model;
    spec.seed = cfg.seed + r;
    Model model(spec);
    result.histories.push_back(
        train_model(model, cfg, train, test, spec.seed, r, on_epoch));
    if (on_model) on_model(r, model);
  }
  result.summary = aggregate(result.histories);
  return result;
}

}  // namespace afkan
