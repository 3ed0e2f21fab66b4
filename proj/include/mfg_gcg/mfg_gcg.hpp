#pragma once

#include "error.hpp"
#include "grid.hpp"
#include "field_io.hpp"
#include "coupling.hpp"
#include "linear_solve.hpp"
#include "pde.hpp"
#include "functionals.hpp"
#include "stepsize.hpp"
#include "gcg.hpp"
#include "config.hpp"
#include "reference.hpp"
#include "commands.hpp"
