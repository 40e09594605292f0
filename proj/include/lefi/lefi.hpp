#pragma once

#include "lefi/models.hpp"
#include "lefi/rng.hpp"
#include "lefi/client.hpp"
#include "lefi/gpr.hpp"
#include "lefi/scenario.hpp"
#include "lefi/optimizer.hpp"
#include "lefi/baselines.hpp"
#include "lefi/harness.hpp"
