#pragma once

#include "bbill/aubry.hpp"
#include "bbill/bmap.hpp"
#include "bbill/chaoscert.hpp"
#include "bbill/error.hpp"
#include "bbill/flight.hpp"
#include "bbill/genfun.hpp"
#include "bbill/radius.hpp"
#include "bbill/simulate.hpp"
