#pragma once

#include "abm/calibrate.hpp"
#include "abm/error.hpp"
#include "abm/ingest.hpp"
#include "abm/rng.hpp"
#include "abm/sim/clusters.hpp"
#include "abm/sim/config.hpp"
#include "abm/sim/ensemble.hpp"
#include "abm/sim/horizon.hpp"
#include "abm/sim/model_ab.hpp"
#include "abm/sim/model_c.hpp"
#include "abm/sim/model_d.hpp"
#include "abm/sim/output.hpp"
#include "abm/spectral.hpp"
#include "abm/stats.hpp"
