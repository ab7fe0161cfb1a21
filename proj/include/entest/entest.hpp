#pragma once

#include "csv.hpp"
#include "dataset.hpp"
#include "error.hpp"
#include "estimators_1d.hpp"
#include "estimators_nd.hpp"
#include "population.hpp"
#include "regression.hpp"
#include "rng.hpp"
#include "simgen.hpp"
#include "sweep.hpp"
