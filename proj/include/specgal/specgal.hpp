#pragma once

#include "specgal/basis.hpp"
#include "specgal/config.hpp"
#include "specgal/continuation.hpp"
#include "specgal/convergence.hpp"
#include "specgal/domain.hpp"
#include "specgal/eigensolve.hpp"
#include "specgal/gram.hpp"
#include "specgal/io.hpp"
#include "specgal/nonlinear.hpp"
#include "specgal/quadrature.hpp"
#include "specgal/verify.hpp"
