#pragma once

#include "mixrank/container.hpp"
#include "mixrank/errors.hpp"
#include "mixrank/lowrank.hpp"
#include "mixrank/mra.hpp"
#include "mixrank/nd_array.hpp"
#include "mixrank/smoothness.hpp"
#include "mixrank/sparse_tensor.hpp"
#include "mixrank/tensor_train.hpp"
#include "mixrank/testbed.hpp"
#include "mixrank/wavelet.hpp"
