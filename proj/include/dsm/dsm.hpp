#pragma once

#include "dsm/errors.hpp"
#include "dsm/core_map.hpp"
#include "dsm/cycles.hpp"
#include "dsm/series.hpp"
#include "dsm/linearize.hpp"
#include "dsm/qc_model.hpp"
#include "dsm/repeller.hpp"
#include "dsm/thermo.hpp"
#include "dsm/scan.hpp"
