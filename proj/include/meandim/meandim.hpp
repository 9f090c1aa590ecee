#pragma once

#include "meandim/config.hpp"
#include "meandim/core.hpp"
#include "meandim/covering.hpp"
#include "meandim/dimension.hpp"
#include "meandim/distribution.hpp"
#include "meandim/group.hpp"
#include "meandim/info_theory.hpp"
#include "meandim/measure.hpp"
#include "meandim/report.hpp"
#include "meandim/runner.hpp"
#include "meandim/subshift.hpp"
