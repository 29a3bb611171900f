#pragma once

#include "fluxcs/basis.hpp"
#include "fluxcs/harness.hpp"
#include "fluxcs/io.hpp"
#include "fluxcs/model.hpp"
#include "fluxcs/rng.hpp"
#include "fluxcs/sensing.hpp"
#include "fluxcs/signal.hpp"
#include "fluxcs/solver.hpp"
#include "fluxcs/theory.hpp"
