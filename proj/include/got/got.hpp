#pragma once

#include "got/errors.hpp"
#include "got/rng.hpp"
#include "got/measures.hpp"
#include "got/noise.hpp"
#include "got/ot_exact.hpp"
#include "got/sinkhorn.hpp"
#include "got/smoothing.hpp"
#include "got/parallel.hpp"
#include "got/got_estimator.hpp"
#include "got/theory_bounds.hpp"
#include "got/experiments.hpp"
#include "got/io.hpp"
#include "got/config.hpp"
#include "got/manifest.hpp"
