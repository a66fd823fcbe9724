#pragma once

#include "ebl/errors.hpp"
#include "ebl/params.hpp"
#include "ebl/quadrature.hpp"
#include "ebl/grid.hpp"
#include "ebl/tridiag.hpp"
#include "ebl/operator.hpp"
#include "ebl/differences.hpp"
#include "ebl/radial.hpp"
#include "ebl/group.hpp"
#include "ebl/spectrum.hpp"
#include "ebl/steklov.hpp"
#include "ebl/perturbed.hpp"
#include "ebl/verification.hpp"
#include "ebl/suites.hpp"
#include "ebl/version.hpp"
