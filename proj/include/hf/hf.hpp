#pragma once

#include "hf/errors.hpp"
#include "hf/geometry.hpp"
#include "hf/hypergraph.hpp"
#include "hf/partition.hpp"
#include "hf/pipeline.hpp"
#include "hf/sampling.hpp"
#include "hf/scale.hpp"
