#pragma once

#include "femtoemit/beam_metrics.hpp"
#include "femtoemit/config.hpp"
#include "femtoemit/constants.hpp"
#include "femtoemit/csv.hpp"
#include "femtoemit/dataset.hpp"
#include "femtoemit/emission.hpp"
#include "femtoemit/errors.hpp"
#include "femtoemit/fit_models.hpp"
#include "femtoemit/laser.hpp"
#include "femtoemit/least_squares.hpp"
#include "femtoemit/optical_emission.hpp"
#include "femtoemit/pulse_stats.hpp"
#include "femtoemit/quadrature.hpp"
#include "femtoemit/report.hpp"
#include "femtoemit/results.hpp"
#include "femtoemit/synthesize.hpp"
