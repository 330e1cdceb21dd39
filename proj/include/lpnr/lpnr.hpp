#pragma once

#include "lpnr/errors.hpp"
#include "lpnr/scalar.hpp"
#include "lpnr/scalar_search.hpp"
#include "lpnr/measure.hpp"
#include "lpnr/lp_core.hpp"
#include "lpnr/random.hpp"
#include "lpnr/operators.hpp"
#include "lpnr/objectives.hpp"
#include "lpnr/witness.hpp"
#include "lpnr/radius.hpp"
#include "lpnr/narrow.hpp"
#include "lpnr/report.hpp"
#include "lpnr/io.hpp"
