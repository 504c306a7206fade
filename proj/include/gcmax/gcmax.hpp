#pragma once

#include "gcmax/cli.hpp"
#include "gcmax/config.hpp"
#include "gcmax/correlation.hpp"
#include "gcmax/emit.hpp"
#include "gcmax/error.hpp"
#include "gcmax/estimators.hpp"
#include "gcmax/explorer.hpp"
#include "gcmax/functional.hpp"
#include "gcmax/parallel.hpp"
#include "gcmax/quadrature.hpp"
#include "gcmax/report.hpp"
#include "gcmax/rng.hpp"
#include "gcmax/sampling.hpp"
#include "gcmax/smoothmax.hpp"
#include "gcmax/verifier.hpp"
