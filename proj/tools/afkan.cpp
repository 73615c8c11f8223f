#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "afkan/data.hpp"
#include "afkan/gradcheck.hpp"
#include "afkan/params_flops.hpp"
#include "afkan/train.hpp"

namespace {

using namespace afkan;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kData = 3,
  kNumeric = 4,
};

class UsageError : public Error {
 public:
  using Error::Error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_widths(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& tok : split(s, ',')) {
    std::size_t pos = 0;
    long v = 0;
    try {
      v = std::stol(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || v <= 0) throw UsageError("invalid width '" + tok + "' in --widths");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.size() < 2) throw UsageError("--widths needs at least two entries, e.g. 784,64,10");
  return out;
}

// "1..5" or "1,3,5".
std::vector<int> parse_sweep(const std::string& s, const char* flag) {
  std::vector<int> out;
  try {
    if (auto dots = s.find(".."); dots != std::string::npos) {
      const int lo = std::stoi(s.substr(0, dots));
      const int hi = std::stoi(s.substr(dots + 2));
      if (lo > hi) throw UsageError("");
      for (int v = lo; v <= hi; ++v) out.push_back(v);
    } else {
      for (const auto& tok : split(s, ',')) out.push_back(std::stoi(tok));
    }
  } catch (const std::exception&) {
    throw UsageError(std::string("invalid ") + flag + " '" + s + "' (use a..b or a,b,c)");
  }
  for (int v : out) {
    if (v < 1) throw UsageError(std::string(flag) + " values must be >= 1");
  }
  return out;
}

bool parse_on_off(const std::string& s, const char* flag) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw UsageError(std::string(flag) + " expects on|off, got '" + s + "'");
}

// Model flags shared by train, params and compare.
struct ModelFlags {
  std::string variant = "afkan";
  std::string widths = "784,64,10";
  int grid = 3;
  int order = 3;
  std::string act = "silu";
  std::string ftype = "quad1";
  std::string mode = "global_attn";
  std::string pln = "layer";
  std::string l2mm = "on";
  std::string basis = "grbf";
  std::size_t num_centers = 8;
  std::uint64_t seed = 0;

  CLI::Option* opt_mode = nullptr;
  CLI::Option* opt_ftype = nullptr;
  CLI::Option* opt_l2mm = nullptr;
  CLI::Option* opt_basis = nullptr;
  CLI::Option* opt_centers = nullptr;
  CLI::Option* opt_grid = nullptr;
  CLI::Option* opt_order = nullptr;
  CLI::Option* opt_act = nullptr;
  CLI::Option* opt_pln = nullptr;

  void attach(CLI::App* app, bool with_variant = true) {
    if (with_variant) {
      app->add_option("--variant", variant, "afkan | relukan | mlp | basis_kan")
          ->capture_default_str();
    }
    app->add_option("--widths", widths, "Comma-separated layer widths")->capture_default_str();
    opt_grid = app->add_option("--grid", grid, "Grid size G")->capture_default_str();
    opt_order = app->add_option("--order", order, "Spline order k")->capture_default_str();
    opt_act = app->add_option("--act", act,
                              "elu | gelu | leaky_relu | relu | selu | sigmoid | silu | softplus | tanh")
                  ->capture_default_str();
    opt_ftype = app->add_option("--ftype", ftype,
                                "sum | prod | sum_prod | quad1 | quad2 | cubic1 | cubic2")
                    ->capture_default_str();
    opt_mode = app->add_option("--mode", mode, "global_attn | spatial_attn | multistep")
                   ->capture_default_str();
    opt_pln = app->add_option("--pln", pln, "Pre-linear normalization: layer | batch | none")
        ->capture_default_str();
    opt_l2mm = app->add_option("--l2mm", l2mm, "L2 + min-max scaling of basis outputs: on | off")
                   ->capture_default_str();
    opt_basis = app->add_option("--basis", basis, "basis_kan basis: grbf | rswaf")
                    ->capture_default_str();
    opt_centers = app->add_option("--num-centers", num_centers, "basis_kan centers")
                      ->capture_default_str();
    app->add_option("--seed", seed, "Base seed")->capture_default_str();
  }

  ModelSpec build(const std::string& variant_override = "") const {
    ModelSpec spec;
    try {
      spec.variant = parse_variant(variant_override.empty() ? variant : variant_override);
      spec.widths = parse_widths(widths);
      spec.grid = GridSpec{grid, order};
      spec.act = parse_activation(act);
      spec.ftype = parse_function_type(ftype);
      spec.mode = parse_reduction_mode(mode);
      spec.pln = parse_norm_kind(pln);
      spec.l2mm = parse_on_off(l2mm, "--l2mm");
      spec.basis = parse_basis_kind(basis);
      spec.num_centers = num_centers;
      spec.seed = seed;
    } catch (const ValueError& e) {
      throw UsageError(e.what());
    }
    const bool afkan = spec.variant == Variant::kAfKan;
    auto reject = [&](CLI::Option* o, bool allowed) {
      if (o != nullptr && o->count() > 0 && !allowed) {
        throw UsageError(o->get_name() + " does not apply to --variant " +
                         std::string(variant_name(spec.variant)));
      }
    };
    if (variant_override.empty()) {
      reject(opt_mode, afkan);
      reject(opt_ftype, afkan);
      reject(opt_l2mm, afkan);
      reject(opt_basis, spec.variant == Variant::kBasisKan);
      reject(opt_centers, spec.variant == Variant::kBasisKan);
      reject(opt_grid, afkan || spec.variant == Variant::kReluKan);
      reject(opt_order, afkan || spec.variant == Variant::kReluKan);
      reject(opt_act, spec.variant != Variant::kReluKan && spec.variant != Variant::kBasisKan);
      reject(opt_pln, spec.variant != Variant::kReluKan);
    }
    try {
      spec.validate();
    } catch (const ValueError& e) {
      throw UsageError(e.what());
    }
    return spec;
  }
};

struct TrainFlags {
  std::string dataset = "mnist";
  std::string data_dir;
  std::size_t epochs = 0;  // 0: 25 for mnist, 35 for fashion_mnist
  std::size_t runs = 5;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  double gamma = 0.8;
  bool skip_train_eval = false;

  void attach(CLI::App* app, std::size_t default_runs) {
    runs = default_runs;
    app->add_option("--dataset", dataset, "mnist | fashion_mnist")->capture_default_str();
    app->add_option("--data-dir", data_dir,
                    "Directory with the IDX files (default: $AFKAN_DATA_DIR or ./data)");
    app->add_option("--epochs", epochs, "Epochs per run (default 25 mnist, 35 fashion_mnist)");
    app->add_option("--runs", runs, "Independent seeded runs")->capture_default_str();
    app->add_option("--batch-size", batch_size, "Minibatch size")->capture_default_str();
    app->add_option("--lr", lr, "Base learning rate")->capture_default_str();
    app->add_option("--weight-decay", weight_decay, "AdamW decoupled weight decay")
        ->capture_default_str();
    app->add_option("--gamma", gamma, "Per-epoch exponential LR decay")->capture_default_str();
    app->add_flag("--skip-train-eval", skip_train_eval,
                  "Skip the post-epoch pass over the train set (train_acc becomes null)");
  }

  DatasetName which() const {
    try {
      return parse_dataset_name(dataset);
    } catch (const ValueError& e) {
      throw UsageError(e.what());
    }
  }

  TrainConfig config(const ModelSpec& spec) const {
    TrainConfig cfg;
    cfg.model = spec;
    cfg.lr = lr;
    cfg.weight_decay = weight_decay;
    cfg.gamma = gamma;
    cfg.eval_train = !skip_train_eval;
    cfg.batch_size = batch_size;
    cfg.epochs = epochs != 0 ? epochs : (which() == DatasetName::kMnist ? 25 : 35);
    cfg.runs = runs;
    cfg.seed = spec.seed;
    try {
      cfg.validate();
    } catch (const ValueError& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

std::string pct(const Stat& s) {
  if (!std::isfinite(s.mean)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << 100.0 * s.mean << " ± " << 100.0 * s.std;
  return os.str();
}

std::filesystem::path run_path(const std::string& base, std::size_t run, std::size_t runs) {
  std::filesystem::path p(base);
  if (runs == 1) return p;
  return p.parent_path() / (p.stem().string() + ".run" + std::to_string(run) + p.extension().string());
}

int cmd_train(const ModelFlags& mf, const TrainFlags& tf, const std::string& log_path,
              const std::string& checkpoint) {
  const ModelSpec spec = mf.build();
  const TrainConfig cfg = tf.config(spec);
  const auto dir = resolve_data_dir(tf.data_dir);
  const Dataset train = load_dataset(dir, tf.which(), Split::kTrain);
  const Dataset test = load_dataset(dir, tf.which(), Split::kTest);

  std::ofstream file;
  std::ostream* log = &std::cout;
  if (log_path != "-") {
    file.open(log_path, std::ios::trunc);
    if (!file) throw DataError("cannot open log file " + log_path);
    log = &file;
  }
  std::cerr << "training " << spec.label() << " on " << tf.dataset << ": " << cfg.runs
            << " run(s) x " << cfg.epochs << " epoch(s), " << count_params(Model(spec)).total
            << " params\n";
  auto on_epoch = [&](const EpochRecord& r) {
    *log << r.to_json() << '\n';
    log->flush();
    std::cerr << "run " << r.run << " epoch " << r.epoch << "  loss " << std::setprecision(5)
              << r.train_loss << "  train " << std::fixed << std::setprecision(2);
    if (std::isfinite(r.train_acc)) {
      std::cerr << 100 * r.train_acc << "%";
    } else {
      std::cerr << "-";
    }
    std::cerr << "  val " << 100 * r.val_acc << "%  f1 "
              << 100 * r.macro_f1 << "%  " << std::setprecision(1) << r.seconds << "s\n"
              << std::defaultfloat;
  };
  auto on_model = [&](std::size_t run, Model& model) {
    if (!checkpoint.empty()) save_checkpoint(model, run_path(checkpoint, run, cfg.runs));
  };
  const auto result = multi_run(cfg, train, test, cfg.runs, on_epoch, on_model);
  *log << result.summary.to_json() << '\n';

  std::cerr << "\n"
            << std::left << std::setw(22) << "model" << std::setw(18) << "train acc (%)"
            << std::setw(18) << "val acc (%)" << std::setw(18) << "F1 (%)" << "seconds\n"
            << std::setw(22) << spec.label() << std::setw(18) << pct(result.summary.train_acc)
            << std::setw(18) << pct(result.summary.val_acc) << std::setw(18)
            << pct(result.summary.macro_f1) << std::fixed << std::setprecision(1)
            << result.summary.seconds.mean << "\n";
  return kOk;
}

int cmd_params(const ModelFlags& mf, std::size_t batch) {
  const ModelSpec spec = mf.build();
  const Model model(spec);
  const ParamReport report = count_params(model);
  const FlopReport flops = estimate_flops(model, batch);
  std::cout << "model " << spec.label() << " widths " << mf.widths << "\n";
  for (std::size_t i = 0; i < report.layers.size(); ++i) {
    const auto& l = report.layers[i];
    std::cout << "layer " << i << " (" << l.kind << " " << l.in << "->" << l.out
              << "): " << l.subtotal << "\n";
    for (const auto& t : l.tensors) {
      std::cout << "  " << std::left << std::setw(24) << t.name << t.count << "\n";
    }
  }
  std::cout << "total " << report.total << "\n\n";
  for (std::size_t i = 0; i < report.layers.size(); ++i) {
    std::cout << "layers." << i << ".params=" << report.layers[i].subtotal << "\n";
    std::cout << "layers." << i << ".dense_flops=" << flops.layers[i].dense << "\n";
    std::cout << "layers." << i << ".elementwise_ops=" << flops.layers[i].elementwise << "\n";
  }
  std::cout << "total_params=" << report.total << "\n"
            << "flops_batch=" << batch << "\n"
            << "dense_flops=" << flops.dense << "\n"
            << "elementwise_ops=" << flops.elementwise << "\n";
  return kOk;
}

int cmd_gradcheck(const GradSuiteOptions& opts, double threshold) {
  if (!(opts.eps >= 1e-7 && opts.eps <= 1e-3)) throw UsageError("--eps must lie in [1e-7, 1e-3]");
  if (opts.trials == 0) throw UsageError("--trials must be >= 1");
  std::vector<std::string> failing;
  double worst = 0.0;
  for (const auto& c : gradient_cases(opts)) {
    const auto r = run_grad_case(c, opts);
    worst = std::max(worst, r.max_error);
    const bool ok = r.max_error < threshold;
    std::cout << (ok ? "ok   " : "FAIL ") << std::left << std::setw(42) << r.label
              << std::scientific << std::setprecision(3) << r.max_error << std::defaultfloat
              << "\n";
    if (!ok) failing.push_back(r.label);
  }
  std::cout << "max_rel_error=" << std::scientific << worst << std::defaultfloat << "\n";
  if (!failing.empty()) {
    std::cerr << failing.size() << " case(s) above " << threshold << ":\n";
    for (const auto& f : failing) std::cerr << "  " << f << "\n";
    return kNumeric;
  }
  return kOk;
}

struct PlotFlags {
  std::string basis = "relu_kan";
  int grid = 5;
  int order = 3;
  std::string act = "relu";
  std::string ftype = "quad1";
  std::size_t resolution = 221;
  double lo = -0.6;
  double hi = 1.6;
  std::size_t num_centers = 8;
  std::string out = "-";
};

int cmd_plot_basis(const PlotFlags& pf) {
  if (pf.resolution < 2) throw UsageError("--resolution must be >= 2");
  if (!(pf.lo < pf.hi)) throw UsageError("--lo must be below --hi");
  GridSpec spec{pf.grid, pf.order};
  ActivationKind act;
  FunctionType ftype;
  try {
    spec.validate();
    act = ActivationKind::of(parse_activation(pf.act));
    ftype = parse_function_type(pf.ftype);
  } catch (const ValueError& e) {
    throw UsageError(e.what());
  }
  const Tensor xs = linspace(pf.lo, pf.hi, pf.resolution);
  const Var x = Var::constant(xs.reshaped(Shape{pf.resolution, 1}));
  Tensor values;  // (resolution, n)
  if (pf.basis == "relu_kan") {
    const PhasePair ph = phase_init(spec, PhaseLayout::kPerInput, 1);
    values = relu_kan_R(x, Var::constant(ph.low), Var::constant(ph.high)).value();
  } else if (pf.basis == "afkan") {
    const PhasePair ph = phase_init(spec, PhaseLayout::kCompact);
    values = basis_A(x, Var::constant(ph.low), Var::constant(ph.high), act, ftype).value();
  } else if (pf.basis == "grbf" || pf.basis == "rswaf") {
    if (pf.num_centers < 2) throw UsageError("--num-centers must be >= 2");
    const Tensor centers = linspace(-2.0, 2.0, pf.num_centers);
    const double h = 4.0 / static_cast<double>(pf.num_centers - 1);
    values = (pf.basis == "grbf" ? grbf(x, centers, h) : rswaf(x, centers, h)).value();
  } else if (pf.basis == "bspline") {
    values = bspline_basis(xs, spec);
  } else {
    throw UsageError("unknown --basis '" + pf.basis +
                     "' (expected relu_kan|afkan|grbf|rswaf|bspline)");
  }
  const std::size_t n = values.size() / pf.resolution;

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (pf.out != "-") {
    file.open(pf.out, std::ios::trunc);
    if (!file) throw DataError("cannot open " + pf.out);
    os = &file;
  }
  *os << "x,i,value\n" << std::setprecision(17);
  for (std::size_t r = 0; r < pf.resolution; ++r) {
    for (std::size_t i = 0; i < n; ++i) *os << xs[r] << ',' << i << ',' << values[r * n + i] << '\n';
  }
  return kOk;
}

int cmd_compare(const ModelFlags& mf, const TrainFlags& tf, const std::string& variants,
                const std::string& grid_sweep, const std::string& order_sweep) {
  const auto which = tf.which();
  std::vector<ModelSpec> specs;
  const std::vector<int> grids = grid_sweep.empty() ? std::vector<int>{mf.grid}
                                                    : parse_sweep(grid_sweep, "--grid-sweep");
  const std::vector<int> orders = order_sweep.empty() ? std::vector<int>{mf.order}
                                                      : parse_sweep(order_sweep, "--order-sweep");
  for (const auto& item : split(variants, ',')) {
    const auto colon = item.find(':');
    const std::string name = item.substr(0, colon);
    ModelSpec spec = mf.build(name);
    if (colon != std::string::npos) {
      const std::string sub = item.substr(colon + 1);
      try {
        if (spec.variant == Variant::kAfKan) {
          spec.mode = parse_reduction_mode(sub);
        } else if (spec.variant == Variant::kBasisKan) {
          spec.basis = parse_basis_kind(sub);
        } else {
          throw UsageError("variant '" + name + "' takes no ':' qualifier");
        }
      } catch (const ValueError& e) {
        throw UsageError(e.what());
      }
    }
    const bool gridded = spec.variant == Variant::kAfKan || spec.variant == Variant::kReluKan;
    for (int g : gridded ? grids : std::vector<int>{spec.grid.grid}) {
      for (int k : gridded ? orders : std::vector<int>{spec.grid.order}) {
        spec.grid = GridSpec{g, k};
        specs.push_back(spec);
      }
    }
  }
  if (specs.empty()) throw UsageError("--variants is empty");
  for (const auto& s : specs) tf.config(s);

  const auto dir = resolve_data_dir(tf.data_dir);
  const Dataset train = load_dataset(dir, which, Split::kTrain);
  const Dataset test = load_dataset(dir, which, Split::kTest);

  std::cout << "variant,grid,order,params,val_acc_mean,val_acc_std,macro_f1_mean,macro_f1_std,"
               "seconds_mean,status\n";
  int status = kOk;
  for (const auto& spec : specs) {
    const TrainConfig cfg = tf.config(spec);
    const std::size_t params = count_params(Model(spec)).total;
    std::cout << spec.label() << ',' << spec.grid.grid << ',' << spec.grid.order << ',' << params
              << ',';
    try {
      auto on_epoch = [&](const EpochRecord& r) {
        std::cerr << spec.label() << " G=" << spec.grid.grid << " k=" << spec.grid.order
                  << " run " << r.run << " epoch " << r.epoch << " val " << std::fixed
                  << std::setprecision(2) << 100 * r.val_acc << "%\n"
                  << std::defaultfloat;
      };
      const auto res = multi_run(cfg, train, test, cfg.runs, on_epoch);
      const auto& s = res.summary;
      std::cout << std::fixed << std::setprecision(4) << 100 * s.val_acc.mean << ','
                << 100 * s.val_acc.std << ',' << 100 * s.macro_f1.mean << ','
                << 100 * s.macro_f1.std << ',' << std::setprecision(1) << s.seconds.mean
                << ",ok\n"
                << std::defaultfloat;
    } catch (const NumericError& e) {
      std::cout << ",,,,,failed\n";
      std::cerr << spec.label() << ": " << e.what() << "\n";
      status = kNumeric;
    }
    std::cout.flush();
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AF-KAN layers, baselines and training harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "afkan 0.1.0");

  ModelFlags train_model_flags;
  TrainFlags train_flags;
  std::string log_path = "-";
  std::string checkpoint = "model.ckpt";
  auto* train = app.add_subcommand("train", "Train and evaluate over seeded runs");
  train_model_flags.attach(train);
  train_flags.attach(train, 5);
  train->add_option("--log", log_path, "JSON-lines metrics log ('-' for stdout)")
      ->capture_default_str();
  train->add_option("--checkpoint", checkpoint,
                    "Checkpoint path ('' to skip); '.run<i>' is inserted when --runs > 1")
      ->capture_default_str();

  ModelFlags params_flags;
  std::size_t flop_batch = 1;
  auto* params = app.add_subcommand("params", "Parameter and FLOP audit");
  params_flags.attach(params);
  params->add_option("--batch", flop_batch, "Batch size for the FLOP estimate")
      ->capture_default_str();

  GradSuiteOptions grad_opts;
  double threshold = 1e-4;
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every variant");
  gradcheck->add_option("--eps", grad_opts.eps, "Central-difference step")->capture_default_str();
  gradcheck->add_option("--trials", grad_opts.trials, "Random instances per case")
      ->capture_default_str();
  gradcheck->add_option("--seed", grad_opts.seed, "Seed")->capture_default_str();
  gradcheck->add_option("--threshold", threshold, "Maximum admissible relative error")
      ->capture_default_str();
  gradcheck->add_flag("--corrupt-backward", grad_opts.corrupt_backward)->group("");

  PlotFlags plot_flags;
  auto* plot = app.add_subcommand("plot-basis", "Export basis curves as CSV (x,i,value)");
  plot->add_option("--basis", plot_flags.basis, "relu_kan | afkan | grbf | rswaf | bspline")
      ->capture_default_str();
  plot->add_option("--grid", plot_flags.grid, "Grid size G")->capture_default_str();
  plot->add_option("--order", plot_flags.order, "Spline order k")->capture_default_str();
  plot->add_option("--act", plot_flags.act, "Activation for --basis afkan")->capture_default_str();
  plot->add_option("--ftype", plot_flags.ftype, "Function type for --basis afkan")
      ->capture_default_str();
  plot->add_option("--resolution", plot_flags.resolution, "Sample points")->capture_default_str();
  plot->add_option("--lo", plot_flags.lo, "Range start")->capture_default_str();
  plot->add_option("--hi", plot_flags.hi, "Range end")->capture_default_str();
  plot->add_option("--num-centers", plot_flags.num_centers, "grbf/rswaf centers")
      ->capture_default_str();
  plot->add_option("--out", plot_flags.out, "Output CSV ('-' for stdout)")->capture_default_str();

  ModelFlags compare_model_flags;
  TrainFlags compare_train_flags;
  std::string variants = "mlp,afkan:global_attn,relukan";
  std::string grid_sweep;
  std::string order_sweep;
  auto* compare = app.add_subcommand("compare", "Train several variants and tabulate results");
  compare->add_option("--variants", variants,
                      "Comma list: mlp, relukan, afkan[:mode], basis_kan[:grbf|rswaf]")
      ->capture_default_str();
  compare_model_flags.attach(compare, false);
  compare_train_flags.attach(compare, 2);
  compare->add_option("--grid-sweep", grid_sweep, "Grid sizes for afkan/relukan, e.g. 1..5");
  compare->add_option("--order-sweep", order_sweep, "Spline orders for afkan/relukan, e.g. 1..4");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*train) return cmd_train(train_model_flags, train_flags, log_path, checkpoint);
    if (*params) return cmd_params(params_flags, flop_batch);
    if (*gradcheck) return cmd_gradcheck(grad_opts, threshold);
    if (*plot) return cmd_plot_basis(plot_flags);
    if (*compare) {
      return cmd_compare(compare_model_flags, compare_train_flags, variants, grid_sweep,
                         order_sweep);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}
