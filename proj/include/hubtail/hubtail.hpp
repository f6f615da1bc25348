#pragma once

#include <hubtail/constants.hpp>
#include <hubtail/errors.hpp>
#include <hubtail/graphstats.hpp>
#include <hubtail/numeric.hpp>
#include <hubtail/oracle.hpp>
#include <hubtail/parallel.hpp>
#include <hubtail/rare_event.hpp>
#include <hubtail/rng.hpp>
#include <hubtail/weights.hpp>
