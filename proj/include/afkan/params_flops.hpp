#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "afkan/model.hpp"

namespace afkan {

struct ParamEntry {
  std::string name;
  std::size_t count = 0;
};

struct LayerParamReport {
  std::string kind;
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<ParamEntry> tensors;
  std::size_t subtotal = 0;
};

struct ParamReport {
  std::vector<LayerParamReport> layers;
  std::size_t total = 0;
};

ParamReport count_params(const Model& model);

// d_in * d_out * (G + k) + d_out.
std::uint64_t kan_params_formula(std::uint64_t d_in, std::uint64_t d_out, std::uint64_t grid,
                                 std::uint64_t order);
// d_in * d_out + d_out.
std::uint64_t mlp_params_formula(std::uint64_t d_in, std::uint64_t d_out);

struct LayerFlops {
  std::string kind;
  std::uint64_t dense = 0;        // 2abc per (a,b)x(b,c) product
  std::uint64_t elementwise = 0;  // one unit per output entry; softmax 5 per entry
};

struct FlopReport {
  std::vector<LayerFlops> layers;
  std::uint64_t dense = 0;
  std::uint64_t elementwise = 0;
};

FlopReport estimate_flops(const Model& model, std::size_t batch = 1);

}  // namespace afkan
