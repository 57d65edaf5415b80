#pragma once

// Umbrella header. config.hpp and report.hpp additionally require
// nlohmann/json on the include path.

#include "rteff/conditions.hpp"
#include "rteff/csv.hpp"
#include "rteff/detector.hpp"
#include "rteff/efficiency.hpp"
#include "rteff/errors.hpp"
#include "rteff/mathutil.hpp"
#include "rteff/pipeline.hpp"
#include "rteff/regression.hpp"
#include "rteff/scenario.hpp"
#include "rteff/telemetry.hpp"
#include "rteff/thevenin.hpp"
#include "rteff/timeutil.hpp"
