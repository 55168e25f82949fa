#pragma once

#include "minmax/errors.hpp"
#include "minmax/game.hpp"
#include "minmax/ode_flow.hpp"
#include "minmax/optimizers.hpp"
#include "minmax/spectral.hpp"
#include "minmax/lyapunov.hpp"
#include "minmax/config.hpp"
#include "minmax/csv.hpp"
#include "minmax/experiments.hpp"
