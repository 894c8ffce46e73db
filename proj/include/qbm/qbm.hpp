// qbm.hpp — Umbrella header.

#pragma once

#include "qbm/errors.hpp"
#include "qbm/covariance.hpp"
#include "qbm/bath.hpp"
#include "qbm/model.hpp"
#include "qbm/propagation.hpp"
#include "qbm/reduced.hpp"
#include "qbm/series.hpp"
#include "qbm/equilibrium.hpp"
#include "qbm/phases.hpp"
#include "qbm/config.hpp"
#include "qbm/io.hpp"
#include "qbm/runner.hpp"
