#pragma once

#include "mkvcyl/drift.hpp"
#include "mkvcyl/errors.hpp"
#include "mkvcyl/fraccalc.hpp"
#include "mkvcyl/girsanov.hpp"
#include "mkvcyl/lattice.hpp"
#include "mkvcyl/lp.hpp"
#include "mkvcyl/measure.hpp"
#include "mkvcyl/mkv.hpp"
#include "mkvcyl/noise.hpp"
#include "mkvcyl/parallel.hpp"
#include "mkvcyl/path_io.hpp"
#include "mkvcyl/quadrature.hpp"
#include "mkvcyl/rng.hpp"
#include "mkvcyl/spectrum.hpp"
#include "mkvcyl/transport.hpp"

#define MKVCYL_VERSION "0.1.0"
