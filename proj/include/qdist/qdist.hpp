#pragma once

#include "qdist/error.hpp"
#include "qdist/topology.hpp"
#include "qdist/physics.hpp"
#include "qdist/capacity.hpp"
#include "qdist/hypergraph.hpp"
#include "qdist/hypergraph_io.hpp"
#include "qdist/lp.hpp"
#include "qdist/formulation.hpp"
#include "qdist/strategies.hpp"
#include "qdist/orchestrator.hpp"
#include "qdist/experiment.hpp"
