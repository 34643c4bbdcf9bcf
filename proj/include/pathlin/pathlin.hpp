#pragma once

#include "pathlin/errors.hpp"
#include "pathlin/geometry.hpp"
#include "pathlin/models.hpp"
#include "pathlin/numerics.hpp"
#include "pathlin/transport.hpp"
#include "pathlin/linearize.hpp"
#include "pathlin/cubemaps.hpp"
#include "pathlin/polycurves.hpp"
#include "pathlin/bundleflow.hpp"
#include "pathlin/samples.hpp"
