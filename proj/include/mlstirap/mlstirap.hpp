#pragma once

#include "mlstirap/error.hpp"
#include "mlstirap/model.hpp"
#include "mlstirap/spectral.hpp"
#include "mlstirap/dynamics.hpp"
#include "mlstirap/analysis.hpp"
