#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "afkan/tensor.hpp"

namespace afkan {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // 2049

// Raw IDX image file contents.
struct IdxImages {
  std::uint32_t count = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

// Reads a file, transparently inflating gzip input.
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

IdxImages parse_idx_images(const std::vector<std::uint8_t>& bytes, const std::string& source);
std::vector<std::uint8_t> parse_idx_labels(const std::vector<std::uint8_t>& bytes,
                                           const std::string& source);

// (N, rows*cols) with raw byte values 0..255.
Tensor load_idx_images(const std::filesystem::path& path);

// Receives one message per label outside 0..9. Defaults to stderr.
using WarningSink = std::function<void(const std::string&)>;
std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path,
                                          const WarningSink& warn = {});

std::vector<std::uint8_t> serialize_idx_images(const IdxImages& images);
std::vector<std::uint8_t> serialize_idx_labels(const std::vector<std::uint8_t>& labels);
void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// x / 255. Refuses input whose maximum is <= 1 (already normalized).
Tensor normalize_pixels(const Tensor& raw);

struct Dataset {
  Tensor images;            // (N, features) in [0, 1]
  std::vector<int> labels;  // N
  std::string name;

  std::size_t size() const { return labels.size(); }
  std::size_t features() const { return images.dim(1); }
};

enum class DatasetName { kMnist, kFashionMnist };
std::string_view dataset_name(DatasetName d);
DatasetName parse_dataset_name(std::string_view name);

enum class Split { kTrain, kTest };

// Resolution order: explicit flag, AFKAN_DATA_DIR, "./data".
std::filesystem::path resolve_data_dir(const std::string& flag_value);

// Looks for the official file names (optionally .gz) in `<dir>/<dataset>/`
// and then in `<dir>/`.
Dataset load_dataset(const std::filesystem::path& dir, DatasetName which, Split split);

struct BatchPlan {
  std::uint64_t seed = 0;
  std::size_t batch_size = 64;
};

// Fisher-Yates permutation of [0, n) keyed by (seed, epoch).
std::vector<std::size_t> epoch_permutation(std::size_t n, std::uint64_t seed, std::size_t epoch);

// Index groups of one epoch; the last partial batch is kept.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, const BatchPlan& plan,
                                                    std::size_t epoch);

struct Batch {
  Tensor images;  // (b, features)
  std::vector<int> labels;
};

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices);
std::vector<Batch> make_batches(const Dataset& ds, const BatchPlan& plan, std::size_t epoch);

}  // namespace afkan
