#pragma once

#include "clusterlab/core_types.hpp"
#include "clusterlab/calculus.hpp"
#include "clusterlab/invariance.hpp"
#include "clusterlab/rng.hpp"
#include "clusterlab/simulators.hpp"
#include "clusterlab/estimation.hpp"
#include "clusterlab/json_io.hpp"
#include "clusterlab/demo.hpp"
