#pragma once

#include "gmmshape/embedding.hpp"
#include "gmmshape/em.hpp"
#include "gmmshape/errors.hpp"
#include "gmmshape/geodesic.hpp"
#include "gmmshape/interpolation.hpp"
#include "gmmshape/kmeans.hpp"
#include "gmmshape/model.hpp"
#include "gmmshape/model_selection.hpp"
#include "gmmshape/rng.hpp"
#include "gmmshape/sampler.hpp"
#include "gmmshape/spd.hpp"
#include "gmmshape/synthetic.hpp"
