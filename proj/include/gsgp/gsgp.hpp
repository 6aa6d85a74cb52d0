#pragma once

#include "gsgp/backend.hpp"
#include "gsgp/core.hpp"
#include "gsgp/evolution.hpp"
#include "gsgp/fitness.hpp"
#include "gsgp/harness.hpp"
#include "gsgp/init.hpp"
#include "gsgp/interpreter.hpp"
#include "gsgp/io.hpp"
#include "gsgp/mutation.hpp"
#include "gsgp/rng.hpp"
