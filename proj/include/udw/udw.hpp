#pragma once

#include "udw/coords.hpp"
#include "udw/domain.hpp"
#include "udw/entropy.hpp"
#include "udw/experiments.hpp"
#include "udw/info.hpp"
#include "udw/joint.hpp"
#include "udw/json_io.hpp"
#include "udw/projection.hpp"
#include "udw/protocol.hpp"
#include "udw/rational.hpp"
#include "udw/report.hpp"
#include "udw/rng.hpp"
#include "udw/sparse.hpp"
