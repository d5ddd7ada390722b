#pragma once

#include "mcorr/ace.hpp"
#include "mcorr/csv.hpp"
#include "mcorr/data.hpp"
#include "mcorr/error.hpp"
#include "mcorr/generators.hpp"
#include "mcorr/measures.hpp"
#include "mcorr/monotone.hpp"
#include "mcorr/smoothing.hpp"
