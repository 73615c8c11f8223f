#include "afkan/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "afkan/random.hpp"

namespace afkan {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t offset) {
  return (std::uint32_t{b[offset]} << 24) | (std::uint32_t{b[offset + 1]} << 16) |
         (std::uint32_t{b[offset + 2]} << 8) | std::uint32_t{b[offset + 3]};
}

void append_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void require_size(const std::vector<std::uint8_t>& bytes, std::size_t expected,
                  const std::string& source) {
  if (bytes.size() < expected) {
    throw DataError(source + ": truncated IDX file, expected " + std::to_string(expected) +
                    " bytes, got " + std::to_string(bytes.size()));
  }
}

std::string hex32(std::uint32_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += kDigits[(v >> shift) & 0xF];
  return s;
}

std::filesystem::path find_file(const std::filesystem::path& dir, DatasetName which,
                                const std::string& stem) {
  const std::filesystem::path dirs[] = {dir / std::string(dataset_name(which)), dir};
  for (const auto& d : dirs) {
    for (const char* suffix : {"", ".gz"}) {
      auto candidate = d / (stem + suffix);
      if (std::filesystem::exists(candidate)) return candidate;
    }
  }
  throw DataError("cannot find '" + stem + "[.gz]' under " + (dir / dataset_name(which)).string() +
                  " or " + dir.string() +
                  "; download the official IDX files there or point --data-dir / AFKAN_DATA_DIR "
                  "at them");
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> chunk(1 << 16);
  for (;;) {
    const int n = gzread(file, chunk.data(), static_cast<unsigned>(chunk.size()));
    if (n < 0) {
      int code = 0;
      const std::string msg = gzerror(file, &code);
      gzclose(file);
      throw DataError("failed reading " + path.string() + ": " + msg);
    }
    if (n == 0) break;
    out.insert(out.end(), chunk.begin(), chunk.begin() + n);
  }
  gzclose(file);
  return out;
}

IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes, const std::string& source) {
  require_size(bytes, 16, source);
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImageMagic) {
    throw DataError(source + ": expected image magic 2051 (0x00000803), read " +
                    std::to_string(magic) + " (" + hex32(magic) + ")");
  }
  IdxImages img;
  img.count = read_be32(bytes, 4);
  img.rows = read_be32(bytes, 8);
  img.cols = read_be32(bytes, 12);
  const std::size_t payload = std::size_t{img.count} * img.rows * img.cols;
  require_size(bytes, 16 + payload, source);
  img.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(payload));
  return img;
}

std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes,
                                           const std::string& source) {
  require_size(bytes, 8, source);
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxLabelMagic) {
    throw DataError(source + ": expected label magic 2049 (0x00000801), read " +
                    std::to_string(magic) + " (" + hex32(magic) + ")");
  }
  const std::size_t count = read_be32(bytes, 4);
  require_size(bytes, 8 + count, source);
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<long>(count)};
}

Tensor load_idx_images(const std::filesystem::path& path) {
  const IdxImages img = parse_idx_images(read_file_bytes(path), path.string());
  if (img.count == 0 || img.rows == 0 || img.cols == 0) {
    throw DataError(path.string() + ": IDX image file has an empty dimension");
  }
  Tensor out(Shape{img.count, std::size_t{img.rows} * img.cols});
  std::copy(img.pixels.begin(), img.pixels.end(), out.data().begin());
  return out;
}

std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path,
                                          const WarningSink& warn) {
  auto labels = parse_idx_labels(read_file_bytes(path), path.string());
  std::size_t bad = 0;
  for (auto v : labels) bad += v > 9 ? 1 : 0;
  if (bad > 0) {
    const std::string msg = path.string() + ": " + std::to_string(bad) +
                            " label(s) outside 0..9 passed through unchanged";
    if (warn) {
      warn(msg);
    } else {
      std::cerr << "warning: " << msg << '\n';
    }
  }
  return labels;
}

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.pixels.size());
  append_be32(out, kIdxImageMagic);
  append_be32(out, images.count);
  append_be32(out, images.rows);
  append_be32(out, images.cols);
  out.insert(out.end(), images.pixels.begin(), images.pixels.end());
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  append_be32(out, kIdxLabelMagic);
  append_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("cannot open for writing: " + path.string());
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw DataError("failed writing " + path.string());
}

Tensor normalize_pixels(const Tensor& raw) {
  if (raw.max_value() <= 1.0) {
    throw ValueError("normalize_pixels: input maximum is <= 1, data looks already normalized");
  }
  Tensor out = raw;
  for (auto& v : out.data()) v /= 255.0;
  return out;
}

std::string_view dataset_name(DatasetName d) {
  switch (d) {
    case DatasetName::kMnist: return "mnist";
    case DatasetName::kFashionMnist: return "fashion_mnist";
  }
  throw ValueError("unknown dataset");
}

DatasetName parse_dataset_name(std::string_view name) {
  if (name == "mnist") return DatasetName::kMnist;
  if (name == "fashion_mnist") return DatasetName::kFashionMnist;
  throw ValueError("unknown dataset '" + std::string(name) + "' (expected mnist|fashion_mnist)");
}

std::filesystem::path resolve_data_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("AFKAN_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

Dataset load_dataset(const std::filesystem::path& dir, DatasetName which, Split split) {
  const bool train = split == Split::kTrain;
  const auto images_path = find_file(dir, which, train ? "train-images-idx3-ubyte" : "t10k-images-idx3-ubyte");
  const auto labels_path = find_file(dir, which, train ? "train-labels-idx1-ubyte" : "t10k-labels-idx1-ubyte");
  Dataset ds;
  ds.name = std::string(dataset_name(which)) + (train ? ":train" : ":test");
  ds.images = normalize_pixels(load_idx_images(images_path));
  const auto labels = load_idx_labels(labels_path);
  if (labels.size() != ds.images.dim(0)) {
    throw DataError("image/label count mismatch: " + std::to_string(ds.images.dim(0)) + " images, " +
                    std::to_string(labels.size()) + " labels");
  }
  ds.labels.assign(labels.begin(), labels.end());
  return ds;
}

std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng(mix_seed(seed, epoch));
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, const BatchPlan& plan,
                                                    std::size_t epoch) {
  if (plan.batch_size == 0) throw ValueError("batch_size must be >= 1");
  const auto perm = epoch_permutation(n, plan.seed, epoch);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n; start += plan.batch_size) {
    const std::size_t stop = std::min(n, start + plan.batch_size);
    out.emplace_back(perm.begin() + static_cast<long>(start), perm.begin() + static_cast<long>(stop));
  }
  return out;
}

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices) {
  const std::size_t f = ds.features();
  Batch b;
  b.images = Tensor(Shape{indices.size(), f});
  b.labels.reserve(indices.size());
  auto src = ds.images.data();
  auto dst = b.images.data();
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    if (i >= ds.size()) throw ValueError("gather: index out of range");
    std::copy_n(src.begin() + static_cast<long>(i * f), f, dst.begin() + static_cast<long>(r * f));
    b.labels.push_back(ds.labels[i]);
  }
  return b;
}

std::vector<Batch> make_batches(const Dataset& ds, const BatchPlan& plan, std::size_t epoch) {
  std::vector<Batch> out;
  for (const auto& idx : batch_indices(ds.size(), plan, epoch)) out.push_back(gather(ds, idx));
  return out;
}

}  // namespace afkan
