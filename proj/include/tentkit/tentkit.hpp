#pragma once

#include "tentkit/core.hpp"
#include "tentkit/dyadic.hpp"
#include "tentkit/interpolation.hpp"
#include "tentkit/io.hpp"
#include "tentkit/kernels.hpp"
#include "tentkit/quadrature.hpp"
#include "tentkit/tent_norms.hpp"
