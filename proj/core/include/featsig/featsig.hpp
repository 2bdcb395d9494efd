#ifndef FEATSIG_FEATSIG_HPP
#define FEATSIG_FEATSIG_HPP

// Umbrella header pulling in the whole public surface.

#include "featsig/adapter.hpp"
#include "featsig/cluster.hpp"
#include "featsig/data.hpp"
#include "featsig/errors.hpp"
#include "featsig/ground_truth.hpp"
#include "featsig/hierarchy.hpp"
#include "featsig/importance.hpp"
#include "featsig/interactions.hpp"
#include "featsig/io.hpp"
#include "featsig/model.hpp"
#include "featsig/perturb.hpp"
#include "featsig/rng.hpp"
#include "featsig/stats.hpp"
#include "featsig/synth.hpp"

#endif  // FEATSIG_FEATSIG_HPP
