#pragma once

#include "bandit.hpp"
#include "experiments.hpp"
#include "io.hpp"
#include "montecarlo.hpp"
#include "random.hpp"
#include "sde.hpp"
