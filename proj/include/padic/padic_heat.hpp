#pragma once

// Umbrella header for the p-adic heat equation library: exact arithmetic on
// Q_p^n, the Taibleson operator, the heat kernel and its Cauchy solver, and
// the associated ultrametric diffusion sampler.

#include "padic/core.hpp"
#include "padic/rational.hpp"
#include "padic/radial.hpp"
#include "padic/gamma_riesz.hpp"
#include "padic/taibleson.hpp"
#include "padic/heat_kernel.hpp"
#include "padic/cauchy.hpp"
#include "padic/diffusion.hpp"
#include "padic/elliptic.hpp"
#include "padic/rng.hpp"
#include "padic/stats.hpp"
