#pragma once

#include "hidm/analysis.hpp"
#include "hidm/codec.hpp"
#include "hidm/design.hpp"
#include "hidm/dyadic.hpp"
#include "hidm/error.hpp"
#include "hidm/json_io.hpp"
#include "hidm/parallel.hpp"
#include "hidm/pas_awgn.hpp"
#include "hidm/shaping_math.hpp"
#include "hidm/structure.hpp"
