#pragma once

#include "infodense/eigenphase.hpp"
#include "infodense/errors.hpp"
#include "infodense/ingest.hpp"
#include "infodense/metrics.hpp"
#include "infodense/mutualinfo.hpp"
#include "infodense/regress.hpp"
#include "infodense/select.hpp"
#include "infodense/serialize.hpp"
#include "infodense/synth.hpp"
