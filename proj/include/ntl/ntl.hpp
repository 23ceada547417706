#pragma once

// Umbrella header for the NTL detection library.

#include "ntl/core.hpp"
#include "ntl/csv.hpp"
#include "ntl/date.hpp"
#include "ntl/error.hpp"
#include "ntl/evaluate.hpp"
#include "ntl/extract.hpp"
#include "ntl/ingest.hpp"
#include "ntl/learn.hpp"
#include "ntl/manifest.hpp"
#include "ntl/rng.hpp"
#include "ntl/select.hpp"
#include "ntl/synth.hpp"
#include "ntl/version.hpp"
