#pragma once

// Umbrella header.

#include "hypergs/barriers.hpp"
#include "hypergs/bubbles.hpp"
#include "hypergs/cartography.hpp"
#include "hypergs/closed_forms.hpp"
#include "hypergs/geometry.hpp"
#include "hypergs/grid.hpp"
#include "hypergs/nehari.hpp"
#include "hypergs/numerics.hpp"
#include "hypergs/pohozaev.hpp"
#include "hypergs/solvers.hpp"
