#pragma once

#include "wlssub/analysis.hpp"
#include "wlssub/baselines.hpp"
#include "wlssub/error.hpp"
#include "wlssub/experiment.hpp"
#include "wlssub/fixtures.hpp"
#include "wlssub/geom3d.hpp"
#include "wlssub/geometry.hpp"
#include "wlssub/io.hpp"
#include "wlssub/mesh.hpp"
#include "wlssub/uniform_masks.hpp"
#include "wlssub/verify.hpp"
#include "wlssub/weights.hpp"
#include "wlssub/wls.hpp"
