#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "afkan/model.hpp"

namespace afkan {

// Largest |g_ad - g_fd| / max(1, |g_ad|, |g_fd|) over every coordinate of
// `thetas`, with central differences (f(t + e) - f(t - e)) / 2e. `f` must
// rebuild the scalar loss from the current leaf values on every call.
double grad_check(const std::function<Var()>& f, const std::vector<Var>& thetas, double eps);
double grad_check(const std::function<Var()>& f, const Var& theta, double eps);

struct GradCase {
  ModelSpec spec;
  std::string label;  // variant/mode/activation/ftype
};

struct GradCaseResult {
  std::string label;
  double max_error = 0.0;
};

struct GradSuiteOptions {
  double eps = 1e-5;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::size_t batch = 4;
  std::size_t in = 12;
  std::size_t out = 5;
  GridSpec grid{3, 3};
  // Test fixture: scales the loss gradient by 1.5 in its backward rule while
  // leaving the forward value unchanged.
  bool corrupt_backward = false;
};

// Every variant x reduction mode x activation x function type that applies.
std::vector<GradCase> gradient_cases(const GradSuiteOptions& opts);

GradCaseResult run_grad_case(const GradCase& c, const GradSuiteOptions& opts);
std::vector<GradCaseResult> run_gradient_suite(const GradSuiteOptions& opts);

}  // namespace afkan
