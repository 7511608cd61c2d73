#pragma once

#include "lume/annotations.hpp"
#include "lume/assignment.hpp"
#include "lume/boxgen.hpp"
#include "lume/errors.hpp"
#include "lume/geometry.hpp"
#include "lume/image.hpp"
#include "lume/metrics.hpp"
#include "lume/saliency.hpp"
#include "lume/synth.hpp"
