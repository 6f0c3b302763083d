#pragma once

// Umbrella header for the library (everything except the CLI front end).

#include "cpctx/classify.hpp"
#include "cpctx/core.hpp"
#include "cpctx/csv.hpp"
#include "cpctx/ctxsim.hpp"
#include "cpctx/evalkit.hpp"
#include "cpctx/features.hpp"
#include "cpctx/ingest.hpp"
#include "cpctx/locpred.hpp"
#include "cpctx/pipeline.hpp"
#include "cpctx/semex.hpp"
#include "cpctx/spatial.hpp"
#include "cpctx/synthgen.hpp"
#include "cpctx/util.hpp"
