#pragma once

// Umbrella header for the connection-state toolkit.

#include "ppslab/connection.hpp"
#include "ppslab/core.hpp"
#include "ppslab/dynamics.hpp"
#include "ppslab/errors.hpp"
#include "ppslab/io.hpp"
#include "ppslab/measurement.hpp"
#include "ppslab/meter.hpp"
#include "ppslab/observable.hpp"
#include "ppslab/scenarios.hpp"
#include "ppslab/states.hpp"
#include "ppslab/tomography.hpp"
