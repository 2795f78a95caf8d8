#pragma once

#include "istq/errors.hpp"
#include "istq/physconst.hpp"
#include "istq/branch.hpp"
#include "istq/circuit.hpp"
#include "istq/quantizer.hpp"
#include "istq/fluxsweep.hpp"
#include "istq/oracle.hpp"
#include "istq/search.hpp"
#include "istq/presets.hpp"
#include "istq/config.hpp"
#include "istq/reference.hpp"
