#pragma once

#include "rangeshift/config.hpp"
#include "rangeshift/csv.hpp"
#include "rangeshift/diagnostics.hpp"
#include "rangeshift/eigen.hpp"
#include "rangeshift/error.hpp"
#include "rangeshift/experiment.hpp"
#include "rangeshift/grid.hpp"
#include "rangeshift/growth.hpp"
#include "rangeshift/parallel.hpp"
#include "rangeshift/solver.hpp"
#include "rangeshift/speeds.hpp"
