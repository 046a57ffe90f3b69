#pragma once

#include "slopewatch/date.hpp"
#include "slopewatch/errors.hpp"
#include "slopewatch/io.hpp"
#include "slopewatch/pipeline.hpp"
#include "slopewatch/regime.hpp"
#include "slopewatch/risk.hpp"
#include "slopewatch/series.hpp"
#include "slopewatch/spectral.hpp"
#include "slopewatch/stats.hpp"
#include "slopewatch/synth.hpp"
