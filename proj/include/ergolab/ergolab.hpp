#pragma once

#include "ergolab/dynamics.hpp"
#include "ergolab/error.hpp"
#include "ergolab/exp_sums.hpp"
#include "ergolab/fourier.hpp"
#include "ergolab/ladder.hpp"
#include "ergolab/maximal.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/polynomial.hpp"
#include "ergolab/random.hpp"
#include "ergolab/spectral.hpp"
#include "ergolab/summation.hpp"
#include "ergolab/weights.hpp"

namespace ergolab {
inline constexpr const char* version = "1.0.0";
}
