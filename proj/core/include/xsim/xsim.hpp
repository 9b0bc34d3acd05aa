#pragma once

#include "xsim/dataio.hpp"
#include "xsim/error.hpp"
#include "xsim/forecaster.hpp"
#include "xsim/metrics.hpp"
#include "xsim/preprocess.hpp"
#include "xsim/similarity.hpp"
#include "xsim/types.hpp"
