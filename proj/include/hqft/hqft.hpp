#pragma once

// Umbrella header for the library modules.

#include "hqft/core/complex.hpp"
#include "hqft/core/io.hpp"
#include "hqft/lattice/lattice.hpp"
#include "hqft/lattice/region.hpp"
#include "hqft/green/green.hpp"
#include "hqft/theory/theory.hpp"
#include "hqft/ccr/ccr.hpp"
#include "hqft/aqft/aqft.hpp"
