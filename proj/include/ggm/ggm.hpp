#pragma once

#include "ggm/errors.hpp"
#include "ggm/matrix.hpp"
#include "ggm/distributions.hpp"
#include "ggm/estimators.hpp"
#include "ggm/ci_tests.hpp"
#include "ggm/graph.hpp"
#include "ggm/simulate.hpp"
#include "ggm/io.hpp"
