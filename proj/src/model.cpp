#include "afkan/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

namespace afkan {

namespace {

constexpr char kMagic[8] = {'A', 'F', 'K', 'A', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw DataError("checkpoint truncated");
  return v;
}

void write_string(std::ostream& os, const std::string& s) {
  write_u64(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
  const std::uint64_t n = read_u64(is);
  if (n > (1ULL << 32)) throw DataError("checkpoint string length implausible");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw DataError("checkpoint truncated");
  return s;
}

void write_tensor(std::ostream& os, const std::string& name, const Tensor& t) {
  write_string(os, name);
  write_u64(os, t.rank());
  for (auto e : t.shape()) write_u64(os, e);
  os.write(reinterpret_cast<const char*>(t.data().data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void read_tensor_into(std::istream& is, const std::string& expected_name, Tensor& target) {
  const std::string name = read_string(is);
  if (name != expected_name) {
    throw DataError("checkpoint tensor '" + name + "' where '" + expected_name + "' was expected");
  }
  const std::uint64_t rank = read_u64(is);
  Shape shape(rank);
  for (auto& e : shape) e = read_u64(is);
  if (shape != target.shape()) {
    throw DataError("checkpoint tensor '" + name + "' has shape " + shape_str(shape) +
                    ", model expects " + shape_str(target.shape()));
  }
  is.read(reinterpret_cast<char*>(target.data().data()),
          static_cast<std::streamsize>(target.size() * sizeof(double)));
  if (!is) throw DataError("checkpoint truncated in tensor '" + name + "'");
}

}  // namespace

void ModelSpec::validate() const {
  if (widths.size() < 2) throw ValueError("model needs at least two widths (input, output)");
  for (auto w : widths) {
    if (w == 0) throw ValueError("model widths must be positive");
  }
  if (variant == Variant::kAfKan || variant == Variant::kReluKan) grid.validate();
  if (variant == Variant::kBasisKan && num_centers < 2) {
    throw ValueError("basis_kan needs at least 2 centers");
  }
}

std::string ModelSpec::to_json() const {
  nlohmann::json j;
  j["widths"] = widths;
  j["variant"] = std::string(variant_name(variant));
  j["grid"] = grid.grid;
  j["order"] = grid.order;
  j["act"] = std::string(activation_name(act));
  j["ftype"] = std::string(function_type_name(ftype));
  j["mode"] = std::string(reduction_mode_name(mode));
  j["pln"] = std::string(norm_kind_name(pln));
  j["l2mm"] = l2mm;
  j["basis"] = std::string(basis_kind_name(basis));
  j["num_centers"] = num_centers;
  j["seed"] = seed;
  return j.dump();
}

ModelSpec ModelSpec::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model spec is not valid JSON: ") + e.what());
  }
  try {
    ModelSpec s;
    s.widths = j.at("widths").get<std::vector<std::size_t>>();
    s.variant = parse_variant(j.at("variant").get<std::string>());
    s.grid.grid = j.at("grid").get<int>();
    s.grid.order = j.at("order").get<int>();
    s.act = parse_activation(j.at("act").get<std::string>());
    s.ftype = parse_function_type(j.at("ftype").get<std::string>());
    s.mode = parse_reduction_mode(j.at("mode").get<std::string>());
    s.pln = parse_norm_kind(j.at("pln").get<std::string>());
    s.l2mm = j.at("l2mm").get<bool>();
    s.basis = parse_basis_kind(j.at("basis").get<std::string>());
    s.num_centers = j.at("num_centers").get<std::size_t>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model spec field missing or mistyped: ") + e.what());
  }
}

std::string ModelSpec::label() const {
  switch (variant) {
    case Variant::kAfKan:
      return "afkan:" + std::string(reduction_mode_name(mode));
    case Variant::kBasisKan:
      return "basis_kan:" + std::string(basis_kind_name(basis));
    case Variant::kReluKan:
    case Variant::kMlp:
      break;
  }
  return std::string(variant_name(variant));
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  Rng rng(spec_.seed);
  const ActivationKind act = ActivationKind::of(spec_.act);
  const std::size_t count = spec_.widths.size() - 1;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t in = spec_.widths[i];
    const std::size_t out = spec_.widths[i + 1];
    switch (spec_.variant) {
      case Variant::kAfKan: {
        AFKanConfig c;
        c.in = in;
        c.out = out;
        c.grid = spec_.grid;
        c.act = act;
        c.ftype = spec_.ftype;
        c.mode = spec_.mode;
        c.pln = spec_.pln;
        c.l2mm = spec_.l2mm;
        layers_.push_back(std::make_unique<AFKanLayer>(c, rng));
        break;
      }
      case Variant::kReluKan:
        layers_.push_back(std::make_unique<ReluKanLayer>(in, out, spec_.grid, rng));
        break;
      case Variant::kMlp:
        layers_.push_back(
            std::make_unique<MlpLayer>(in, out, spec_.pln, act, i + 1 < count, rng));
        break;
      case Variant::kBasisKan:
        layers_.push_back(std::make_unique<BasisKanLayer>(in, out, spec_.basis,
                                                          spec_.num_centers, spec_.pln, rng));
        break;
    }
  }
}

Var Model::forward(const Var& x, bool training) {
  Var h = x;
  for (auto& layer : layers_) h = layer->forward(h, training);
  return h;
}

Tensor Model::predict(const Tensor& x) {
  NoGradGuard guard;
  return forward(Var::constant(x), false).value();
}

std::vector<NamedParam> Model::parameters() const {
  std::vector<NamedParam> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& p : layers_[i]->parameters()) {
      out.push_back({"layers." + std::to_string(i) + "." + p.name, p.var});
    }
  }
  return out;
}

std::vector<NamedBuffer> Model::buffers() {
  std::vector<NamedBuffer> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    for (auto& b : layers_[i]->buffers()) {
      out.push_back({"layers." + std::to_string(i) + "." + b.name, b.tensor});
    }
  }
  return out;
}

void Model::zero_grad() {
  for (auto& p : parameters()) p.var.zero_grad();
}

void save_checkpoint(Model& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open checkpoint for writing: " + path.string());
  os.write(kMagic, sizeof kMagic);
  const std::uint32_t version = kVersion;
  os.write(reinterpret_cast<const char*>(&version), sizeof version);
  write_string(os, model.spec().to_json());
  const auto params = model.parameters();
  const auto buffers = model.buffers();
  write_u64(os, params.size() + buffers.size());
  for (const auto& p : params) write_tensor(os, p.name, p.var.value());
  for (const auto& b : buffers) write_tensor(os, b.name, *b.tensor);
  if (!os) throw DataError("failed writing checkpoint: " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint: " + path.string());
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw DataError("not an afkan checkpoint: " + path.string());
  }
  std::uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), sizeof version);
  if (!is || version != kVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  Model model(ModelSpec::from_json(read_string(is)));
  auto params = model.parameters();
  auto buffers = model.buffers();
  const std::uint64_t count = read_u64(is);
  if (count != params.size() + buffers.size()) {
    throw DataError("checkpoint holds " + std::to_string(count) + " tensors, model expects " +
                    std::to_string(params.size() + buffers.size()));
  }
  for (auto& p : params) read_tensor_into(is, p.name, p.var.mutable_value());
  for (auto& b : buffers) read_tensor_into(is, b.name, *b.tensor);
  return model;
}

}  // namespace afkan
