// SPDX-License-Identifier: MIT

#pragma once

#include "diagen/core.hpp"
#include "diagen/criteria.hpp"
#include "diagen/estimation.hpp"
#include "diagen/io.hpp"
#include "diagen/pipeline.hpp"
#include "diagen/rng.hpp"
#include "diagen/search.hpp"
#include "diagen/simulator.hpp"
#include "diagen/stats.hpp"
