#pragma once

#include "lpeval/error.hpp"
#include "lpeval/experiments.hpp"
#include "lpeval/graph_store.hpp"
#include "lpeval/instance.hpp"
#include "lpeval/metrics.hpp"
#include "lpeval/predictors.hpp"
#include "lpeval/rng.hpp"
#include "lpeval/stratify.hpp"
#include "lpeval/synthetic.hpp"
