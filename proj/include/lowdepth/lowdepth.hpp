#pragma once

#include "lowdepth/core/errors.hpp"
#include "lowdepth/core/linalg.hpp"
#include "lowdepth/core/parallel.hpp"
#include "lowdepth/core/rng.hpp"
#include "lowdepth/core/stats.hpp"
#include "lowdepth/perm_calculus.hpp"
#include "lowdepth/pauli.hpp"
#include "lowdepth/clifford.hpp"
#include "lowdepth/circuit.hpp"
#include "lowdepth/pfc.hpp"
#include "lowdepth/ensembles.hpp"
#include "lowdepth/simulator.hpp"
#include "lowdepth/serialize.hpp"
#include "lowdepth/geometry.hpp"
#include "lowdepth/design_verifier.hpp"
#include "lowdepth/shadows.hpp"
#include "lowdepth/dist_stats.hpp"
#include "lowdepth/protocols.hpp"
