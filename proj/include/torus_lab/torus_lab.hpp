#pragma once

// Everything at once.

#include "torus_lab/grid_fields.hpp"
#include "torus_lab/riemannian.hpp"
#include "torus_lab/symplectic.hpp"
#include "torus_lab/diffeo_action.hpp"
#include "torus_lab/momentum_map.hpp"
#include "torus_lab/random_geometry.hpp"
#include "torus_lab/reports.hpp"
