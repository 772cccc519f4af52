#pragma once

#include "envnet/env_path.hpp"
#include "envnet/errors.hpp"
#include "envnet/finite_time.hpp"
#include "envnet/fixtures.hpp"
#include "envnet/model.hpp"
#include "envnet/oracle.hpp"
#include "envnet/parallel.hpp"
#include "envnet/propagator.hpp"
#include "envnet/rng.hpp"
#include "envnet/stationary.hpp"
#include "envnet/structure.hpp"
