#pragma once

#include "errors.hpp"
#include "numerics.hpp"
#include "phantom.hpp"
#include "delay.hpp"
#include "covariance.hpp"
#include "beamformers.hpp"
#include "pipeline.hpp"
#include "metrics.hpp"
#include "io.hpp"
#include "run.hpp"
