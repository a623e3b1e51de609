#pragma once

#include "gsdopt/error.hpp"
#include "gsdopt/normal.hpp"
#include "gsdopt/rates.hpp"
#include "gsdopt/gauss.hpp"
#include "gsdopt/spending.hpp"
#include "gsdopt/power.hpp"
#include "gsdopt/boundaries.hpp"
#include "gsdopt/design.hpp"
#include "gsdopt/optimizer.hpp"
#include "gsdopt/oracle.hpp"
#include "gsdopt/config.hpp"
#include "gsdopt/report.hpp"
