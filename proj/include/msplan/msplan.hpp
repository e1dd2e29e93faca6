#pragma once

#include "camera.hpp"
#include "error.hpp"
#include "field.hpp"
#include "gp.hpp"
#include "metrics.hpp"
#include "oracle.hpp"
#include "planner.hpp"
#include "raster.hpp"
#include "region.hpp"
#include "rng.hpp"
#include "sim.hpp"
