#pragma once

#include "dgmm/analyze.hpp"
#include "dgmm/concurrent.hpp"
#include "dgmm/consolidate.hpp"
#include "dgmm/error.hpp"
#include "dgmm/graph.hpp"
#include "dgmm/ingest.hpp"
#include "dgmm/log.hpp"
#include "dgmm/provenance.hpp"
#include "dgmm/recall.hpp"
#include "dgmm/schema.hpp"
#include "dgmm/time_value.hpp"
#include "dgmm/validate.hpp"
