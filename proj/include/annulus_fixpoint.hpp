// Umbrella header for the library (the command-line front end lives in
// annulus_fixpoint/cli.hpp and is not included here).
#pragma once

#include "annulus_fixpoint/boxgraph.hpp"
#include "annulus_fixpoint/conley.hpp"
#include "annulus_fixpoint/core.hpp"
#include "annulus_fixpoint/digraph.hpp"
#include "annulus_fixpoint/diskchain.hpp"
#include "annulus_fixpoint/fixpoint.hpp"
#include "annulus_fixpoint/linkage.hpp"
#include "annulus_fixpoint/map_config.hpp"
#include "annulus_fixpoint/pipeline.hpp"
#include "annulus_fixpoint/report.hpp"
#include "annulus_fixpoint/reversible.hpp"
