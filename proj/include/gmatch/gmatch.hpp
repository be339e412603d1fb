#pragma once

#include "gmatch/baseline.hpp"
#include "gmatch/common.hpp"
#include "gmatch/discretize.hpp"
#include "gmatch/graph_model.hpp"
#include "gmatch/io.hpp"
#include "gmatch/metrics.hpp"
#include "gmatch/objective.hpp"
#include "gmatch/pipeline.hpp"
#include "gmatch/report.hpp"
#include "gmatch/solver.hpp"
#include "gmatch/svg.hpp"
#include "gmatch/synthetic.hpp"
