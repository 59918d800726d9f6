#pragma once

#include "ewclt/circle_function.hpp"
#include "ewclt/equidistribution.hpp"
#include "ewclt/errors.hpp"
#include "ewclt/evaluation_point.hpp"
#include "ewclt/ewens.hpp"
#include "ewclt/experiment.hpp"
#include "ewclt/io.hpp"
#include "ewclt/mahler.hpp"
#include "ewclt/quadrature.hpp"
#include "ewclt/rng.hpp"
#include "ewclt/statistic.hpp"
#include "ewclt/stats.hpp"
#include "ewclt/stein.hpp"
#include "ewclt/wasserstein.hpp"
