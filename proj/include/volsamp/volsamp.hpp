#pragma once

#include "volsamp/error.hpp"
#include "volsamp/measure_model.hpp"
#include "volsamp/schmidt.hpp"
#include "volsamp/volumes.hpp"
#include "volsamp/samplers.hpp"
#include "volsamp/selection.hpp"
#include "volsamp/generators.hpp"
#include "volsamp/identities.hpp"
#include "volsamp/io.hpp"
