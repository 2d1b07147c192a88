#pragma once

#include "doprd/batch.hpp"
#include "doprd/error.hpp"
#include "doprd/harness.hpp"
#include "doprd/instance.hpp"
#include "doprd/instance_io.hpp"
#include "doprd/mdp.hpp"
#include "doprd/optkernel.hpp"
#include "doprd/policies.hpp"
#include "doprd/rng.hpp"
#include "doprd/tour_dp.hpp"
#include "doprd/types.hpp"
#include "doprd/uncertainty.hpp"
