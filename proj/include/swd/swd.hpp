#pragma once

// Library umbrella. The CLI layer (swd/app.hpp) is separate since it pulls in CLI11.

#include "swd/bench.hpp"
#include "swd/dataset.hpp"
#include "swd/dct.hpp"
#include "swd/dropout.hpp"
#include "swd/error.hpp"
#include "swd/grad.hpp"
#include "swd/layers.hpp"
#include "swd/pgm.hpp"
#include "swd/rng.hpp"
#include "swd/tensor.hpp"
#include "swd/train.hpp"
#include "swd/verify.hpp"
#include "swd/wavelet.hpp"
