#pragma once

// Umbrella header for the whole library.

#include "panda/baselines.hpp"
#include "panda/dynamic.hpp"
#include "panda/energy.hpp"
#include "panda/metrics.hpp"
#include "panda/numeric.hpp"
#include "panda/optimizer.hpp"
#include "panda/parallel.hpp"
#include "panda/preamble.hpp"
#include "panda/profile_io.hpp"
#include "panda/renewal.hpp"
#include "panda/scenario.hpp"
#include "panda/seeding.hpp"
#include "panda/simulator.hpp"
#include "panda/topology.hpp"
#include "panda/types.hpp"
