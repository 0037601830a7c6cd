#pragma once

#include "twkb/errors.hpp"
#include "twkb/grid.hpp"
#include "twkb/physics.hpp"
#include "twkb/kappa_system.hpp"
#include "twkb/roots.hpp"
#include "twkb/parallel.hpp"
#include "twkb/branches.hpp"
#include "twkb/airy.hpp"
#include "twkb/analysis.hpp"
#include "twkb/csv.hpp"
#include "twkb/run_config.hpp"
#include "twkb/commands.hpp"
