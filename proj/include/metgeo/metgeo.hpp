#pragma once

#include "metgeo/diagnostics.hpp"
#include "metgeo/generators.hpp"
#include "metgeo/line_embedding.hpp"
#include "metgeo/metric_space.hpp"
#include "metgeo/pretangent.hpp"
#include "metgeo/tolerance.hpp"
#include "metgeo/triples.hpp"
