#pragma once

#include "driftsel/basis.hpp"
#include "driftsel/bench.hpp"
#include "driftsel/correlation.hpp"
#include "driftsel/csv.hpp"
#include "driftsel/ensemble_io.hpp"
#include "driftsel/error.hpp"
#include "driftsel/estimator.hpp"
#include "driftsel/models.hpp"
#include "driftsel/parallel.hpp"
#include "driftsel/rng.hpp"
#include "driftsel/selection.hpp"
#include "driftsel/simulate.hpp"
