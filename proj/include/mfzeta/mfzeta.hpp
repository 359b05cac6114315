#pragma once

#include "graph.hpp"
#include "symbolic.hpp"
#include "potentials.hpp"
#include "thermo.hpp"
#include "multifractal.hpp"
#include "birkhoff.hpp"
#include "ldp.hpp"
