#pragma once

#include "afkan/activations.hpp"
#include "afkan/autodiff.hpp"
#include "afkan/basis.hpp"
#include "afkan/data.hpp"
#include "afkan/gradcheck.hpp"
#include "afkan/layers.hpp"
#include "afkan/model.hpp"
#include "afkan/normalization.hpp"
#include "afkan/params_flops.hpp"
#include "afkan/random.hpp"
#include "afkan/tensor.hpp"
#include "afkan/train.hpp"
