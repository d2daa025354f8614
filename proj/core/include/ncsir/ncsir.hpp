#pragma once

#include "ncsir/analysis.hpp"
#include "ncsir/error.hpp"
#include "ncsir/model.hpp"
#include "ncsir/scenarios.hpp"
#include "ncsir/solver.hpp"
