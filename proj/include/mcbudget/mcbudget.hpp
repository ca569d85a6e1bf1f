#pragma once

#include "mcbudget/common.hpp"
#include "mcbudget/distribution.hpp"
#include "mcbudget/task.hpp"
#include "mcbudget/sched.hpp"
#include "mcbudget/assign.hpp"
#include "mcbudget/generator.hpp"
#include "mcbudget/simulator.hpp"
#include "mcbudget/io.hpp"
#include "mcbudget/experiment.hpp"
