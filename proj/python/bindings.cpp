#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "afkan/afkan.hpp"

namespace py = pybind11;
using namespace afkan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  Shape shape;
  for (py::ssize_t i = 0; i < a.ndim(); ++i) shape.push_back(static_cast<std::size_t>(a.shape(i)));
  if (shape.empty()) shape.push_back(1);
  return Tensor(shape, std::vector<double>(a.data(), a.data() + a.size()));
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array out(shape);
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

Dataset to_dataset(const Array& images, const std::vector<int>& labels) {
  if (images.ndim() != 2) throw ShapeError("images must be a 2-D array (N, features)");
  Dataset ds;
  ds.images = to_tensor(images);
  ds.labels = labels;
  if (ds.images.dim(0) != ds.labels.size()) {
    throw ShapeError("images and labels disagree on the sample count");
  }
  return ds;
}

py::dict record_dict(const EpochRecord& r, bool has_train_acc) {
  py::dict d;
  d["run"] = r.run;
  d["epoch"] = r.epoch;
  d["lr"] = r.lr;
  d["train_loss"] = r.train_loss;
  d["train_acc"] = has_train_acc ? py::object(py::float_(r.train_acc)) : py::object(py::none());
  d["val_acc"] = r.val_acc;
  d["macro_f1"] = r.macro_f1;
  d["seconds"] = r.seconds;
  return d;
}

template <class Enum, class Name, class Parse>
void enum_property(py::class_<ModelSpec>& cls, const char* name, Enum ModelSpec::*field, Name to_name,
                   Parse parse) {
  cls.def_property(
      name, [field, to_name](const ModelSpec& s) { return std::string(to_name(s.*field)); },
      [field, parse](ModelSpec& s, const std::string& v) { s.*field = parse(v); });
}

}  // namespace

PYBIND11_MODULE(_afkan, m) {
  m.doc() = "AF-KAN layers, baselines and training harness";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<ValueError>(m, "ValueError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());

  py::class_<ModelSpec> spec(m, "ModelSpec");
  spec.def(py::init<>())
      .def_readwrite("widths", &ModelSpec::widths)
      .def_property(
          "grid", [](const ModelSpec& s) { return s.grid.grid; },
          [](ModelSpec& s, int g) { s.grid.grid = g; })
      .def_property(
          "order", [](const ModelSpec& s) { return s.grid.order; },
          [](ModelSpec& s, int k) { s.grid.order = k; })
      .def_readwrite("l2mm", &ModelSpec::l2mm)
      .def_readwrite("num_centers", &ModelSpec::num_centers)
      .def_readwrite("seed", &ModelSpec::seed);
  enum_property(spec, "variant", &ModelSpec::variant, variant_name, parse_variant);
  enum_property(spec, "act", &ModelSpec::act, activation_name, parse_activation);
  enum_property(spec, "ftype", &ModelSpec::ftype, function_type_name, parse_function_type);
  enum_property(spec, "mode", &ModelSpec::mode, reduction_mode_name, parse_reduction_mode);
  enum_property(spec, "pln", &ModelSpec::pln, norm_kind_name, parse_norm_kind);
  enum_property(spec, "basis", &ModelSpec::basis, basis_kind_name, parse_basis_kind);
  spec.def("validate", &ModelSpec::validate)
      .def("label", &ModelSpec::label)
      .def("to_json", &ModelSpec::to_json)
      .def_static("from_json", &ModelSpec::from_json)
      .def(py::self == py::self)
      .def("__repr__", [](const ModelSpec& s) { return "ModelSpec(" + s.to_json() + ")"; });

  py::class_<Model>(m, "Model")
      .def(py::init<ModelSpec>(), py::arg("spec"))
      .def_property_readonly("spec", &Model::spec)
      .def(
          "predict", [](Model& model, const Array& x) { return to_array(model.predict(to_tensor(x))); },
          py::arg("x"))
      .def("parameters",
           [](const Model& model) {
             py::dict out;
             for (const auto& p : model.parameters()) out[py::str(p.name)] = to_array(p.var.value());
             return out;
           })
      .def("save", [](Model& model, const std::filesystem::path& path) { save_checkpoint(model, path); },
           py::arg("path"))
      .def_static("load", &load_checkpoint, py::arg("path"));

  m.def(
      "count_params",
      [](const Model& model) {
        const ParamReport r = count_params(model);
        py::list layers;
        for (const auto& l : r.layers) {
          py::dict tensors;
          for (const auto& t : l.tensors) tensors[py::str(t.name)] = t.count;
          py::dict d;
          d["kind"] = l.kind;
          d["in"] = l.in;
          d["out"] = l.out;
          d["tensors"] = tensors;
          d["subtotal"] = l.subtotal;
          layers.append(d);
        }
        py::dict out;
        out["layers"] = layers;
        out["total"] = r.total;
        return out;
      },
      py::arg("model"));
  m.def(
      "estimate_flops",
      [](const Model& model, std::size_t batch) {
        const FlopReport r = estimate_flops(model, batch);
        py::dict out;
        out["dense"] = r.dense;
        out["elementwise"] = r.elementwise;
        return out;
      },
      py::arg("model"), py::arg("batch") = 1);
  m.def("kan_params_formula", &kan_params_formula, py::arg("d_in"), py::arg("d_out"), py::arg("grid"),
        py::arg("order"));
  m.def("mlp_params_formula", &mlp_params_formula, py::arg("d_in"), py::arg("d_out"));

  m.def(
      "activation",
      [](const std::string& name, const Array& x) {
        return to_array(act_forward(ActivationKind::of(parse_activation(name)), to_tensor(x)));
      },
      py::arg("name"), py::arg("x"));
  m.def(
      "phase_init",
      [](int grid, int order) {
        const PhasePair p = phase_init(GridSpec{grid, order}, PhaseLayout::kCompact);
        return py::make_tuple(to_array(p.low), to_array(p.high));
      },
      py::arg("grid") = 3, py::arg("order") = 3);
  m.def(
      "basis_a",
      [](const Array& x, const std::string& act, const std::string& ftype, int grid, int order) {
        NoGradGuard guard;
        const PhasePair p = phase_init(GridSpec{grid, order}, PhaseLayout::kCompact);
        const Var out = basis_A(Var::constant(to_tensor(x)), Var::constant(p.low),
                                Var::constant(p.high), ActivationKind::of(parse_activation(act)),
                                parse_function_type(ftype));
        return to_array(out.value());
      },
      py::arg("x"), py::arg("act") = "silu", py::arg("ftype") = "quad1", py::arg("grid") = 3,
      py::arg("order") = 3);
  m.def(
      "relu_kan_r",
      [](const Array& x, int grid, int order) {
        NoGradGuard guard;
        const Tensor xt = to_tensor(x);
        if (xt.rank() != 2) throw ShapeError("relu_kan_r: x must be (B, D)");
        const PhasePair p = phase_init(GridSpec{grid, order}, PhaseLayout::kPerInput, xt.dim(1));
        return to_array(relu_kan_R(Var::constant(xt), Var::constant(p.low), Var::constant(p.high)).value());
      },
      py::arg("x"), py::arg("grid") = 5, py::arg("order") = 3);
  m.def(
      "bspline_basis",
      [](const Array& x, int grid, int order, double lo, double hi) {
        return to_array(bspline_basis(to_tensor(x), GridSpec{grid, order}, lo, hi));
      },
      py::arg("x"), py::arg("grid") = 5, py::arg("order") = 3, py::arg("lo") = -1.0, py::arg("hi") = 1.0);
  m.def(
      "l2_minmax",
      [](const Array& x) {
        NoGradGuard guard;
        return to_array(l2_minmax(Var::constant(to_tensor(x))).value());
      },
      py::arg("x"));

  m.def(
      "load_mnist",
      [](const std::string& data_dir, const std::string& dataset, const std::string& split) {
        if (split != "train" && split != "test") throw ValueError("split must be 'train' or 'test'");
        const Dataset ds = load_dataset(resolve_data_dir(data_dir), parse_dataset_name(dataset),
                                        split == "train" ? Split::kTrain : Split::kTest);
        return py::make_tuple(to_array(ds.images), ds.labels);
      },
      py::arg("data_dir") = "", py::arg("dataset") = "mnist", py::arg("split") = "train");

  m.def(
      "train",
      [](Model& model, const Array& train_x, const std::vector<int>& train_y, const Array& test_x,
         const std::vector<int>& test_y, std::size_t epochs, double lr, std::size_t batch_size,
         std::uint64_t seed, bool eval_train, const std::function<void(py::dict)>& on_epoch) {
        TrainConfig cfg;
        cfg.model = model.spec();
        cfg.epochs = epochs;
        cfg.lr = lr;
        cfg.batch_size = batch_size;
        cfg.runs = 1;
        cfg.seed = seed;
        cfg.eval_train = eval_train;
        cfg.validate();
        const Dataset train = to_dataset(train_x, train_y);
        const Dataset test = to_dataset(test_x, test_y);
        EpochCallback cb;
        if (on_epoch) cb = [&](const EpochRecord& r) { on_epoch(record_dict(r, eval_train)); };
        const RunHistory h = train_model(model, cfg, train, test, seed, 0, cb);
        py::list out;
        for (const auto& r : h.epochs) out.append(record_dict(r, eval_train));
        return out;
      },
      py::arg("model"), py::arg("train_x"), py::arg("train_y"), py::arg("test_x"), py::arg("test_y"),
      py::arg("epochs") = 25, py::arg("lr") = 1e-3, py::arg("batch_size") = 64, py::arg("seed") = 0,
      py::arg("eval_train") = true, py::arg("on_epoch") = nullptr);

  m.def(
      "gradient_suite",
      [](double eps, std::uint64_t seed) {
        GradSuiteOptions opts;
        opts.eps = eps;
        opts.seed = seed;
        py::dict out;
        for (const auto& r : run_gradient_suite(opts)) out[py::str(r.label)] = r.max_error;
        return out;
      },
      py::arg("eps") = 1e-5, py::arg("seed") = 0);
}
