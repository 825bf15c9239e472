#pragma once

#include "polarfact/convex.hpp"
#include "polarfact/error.hpp"
#include "polarfact/io.hpp"
#include "polarfact/measures.hpp"
#include "polarfact/polar.hpp"
#include "polarfact/rearrangement.hpp"
#include "polarfact/transport.hpp"
