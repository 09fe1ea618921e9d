// Umbrella header for the library (everything except the CLI).
#pragma once

#include "coexist/analytic.hpp"
#include "coexist/circuits.hpp"
#include "coexist/error.hpp"
#include "coexist/experiments.hpp"
#include "coexist/io.hpp"
#include "coexist/linalg.hpp"
#include "coexist/observables.hpp"
#include "coexist/validation.hpp"
