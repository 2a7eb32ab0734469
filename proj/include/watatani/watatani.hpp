#pragma once

#include "watatani/cuntz.hpp"
#include "watatani/dsl.hpp"
#include "watatani/multimatrix.hpp"
#include "watatani/report.hpp"
#include "watatani/rokhlin.hpp"
#include "watatani/runner.hpp"
#include "watatani/temperley_lieb.hpp"
#include "watatani/tower.hpp"
