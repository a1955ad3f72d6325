#pragma once

#include "bernstein/acceptance.hpp"
#include "bernstein/coefficients.hpp"
#include "bernstein/datum.hpp"
#include "bernstein/errors.hpp"
#include "bernstein/galerkin.hpp"
#include "bernstein/gaussian_form.hpp"
#include "bernstein/hermite.hpp"
#include "bernstein/kernel.hpp"
#include "bernstein/model.hpp"
#include "bernstein/process.hpp"
#include "bernstein/quadrature.hpp"
#include "bernstein/region.hpp"
#include "bernstein/sampler.hpp"
