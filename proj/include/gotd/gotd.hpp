#pragma once

#include "gotd/common.hpp"
#include "gotd/solvers.hpp"
#include "gotd/concepts.hpp"
#include "gotd/fixed_rank.hpp"
#include "gotd/sparsity.hpp"
#include "gotd/constraints.hpp"
#include "gotd/trace.hpp"
#include "gotd/algorithm.hpp"
#include "gotd/fastproj.hpp"
#include "gotd/feasibility.hpp"
#include "gotd/rng.hpp"
#include "gotd/problems.hpp"
