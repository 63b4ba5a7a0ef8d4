#pragma once

// Umbrella header: the full engine, from domain vocabulary to the command
// layer the CLI wraps.

#include "desksim/agents.hpp"
#include "desksim/domain.hpp"
#include "desksim/errors.hpp"
#include "desksim/gateway.hpp"
#include "desksim/log.hpp"
#include "desksim/market.hpp"
#include "desksim/metrics.hpp"
#include "desksim/prompts.hpp"
#include "desksim/reports.hpp"
#include "desksim/run.hpp"
#include "desksim/sha256.hpp"
#include "desksim/strategy.hpp"
#include "desksim/version.hpp"
