#pragma once

#include "covplan/geometry.hpp"
#include "covplan/scene.hpp"
#include "covplan/sensor.hpp"
#include "covplan/occupancy.hpp"
#include "covplan/gaussians.hpp"
#include "covplan/splat.hpp"
#include "covplan/planner.hpp"
#include "covplan/eval.hpp"
#include "covplan/mission.hpp"
#include "covplan/verify.hpp"
#include "covplan/config.hpp"
