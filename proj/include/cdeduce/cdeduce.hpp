// cdeduce/cdeduce.hpp — umbrella header.

#pragma once

#include "cdeduce/bisim.hpp"
#include "cdeduce/derivation.hpp"
#include "cdeduce/event.hpp"
#include "cdeduce/evolution.hpp"
#include "cdeduce/microcosm.hpp"
#include "cdeduce/offline.hpp"
#include "cdeduce/online.hpp"
#include "cdeduce/result.hpp"
#include "cdeduce/scenario.hpp"
#include "cdeduce/world.hpp"
