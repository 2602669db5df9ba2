#pragma once

// Single include pulling in the whole library.

#include "dopd/algorithm.hpp"
#include "dopd/bregman.hpp"
#include "dopd/experiment.hpp"
#include "dopd/graph.hpp"
#include "dopd/linalg.hpp"
#include "dopd/metrics.hpp"
#include "dopd/problem.hpp"
#include "dopd/rng.hpp"
#include "dopd/trace_io.hpp"
