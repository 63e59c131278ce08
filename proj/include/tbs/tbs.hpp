#pragma once

#include "tbs/geometry.hpp"
#include "tbs/harness.hpp"
#include "tbs/inequalities.hpp"
#include "tbs/json_io.hpp"
#include "tbs/lhv.hpp"
#include "tbs/optimizer.hpp"
#include "tbs/quantum.hpp"
#include "tbs/random.hpp"
#include "tbs/records.hpp"
#include "tbs/sampling.hpp"
