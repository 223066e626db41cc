// Umbrella header.

#pragma once

#include "hho2d/analysis.hpp"
#include "hho2d/assembly.hpp"
#include "hho2d/basis.hpp"
#include "hho2d/cases.hpp"
#include "hho2d/geometry.hpp"
#include "hho2d/local_ops.hpp"
#include "hho2d/mesh.hpp"
#include "hho2d/quadrature.hpp"
