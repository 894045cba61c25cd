#pragma once

#include "rclab/bethe.hpp"
#include "rclab/error.hpp"
#include "rclab/exact.hpp"
#include "rclab/graph.hpp"
#include "rclab/log_value.hpp"
#include "rclab/mapping.hpp"
#include "rclab/parallel.hpp"
#include "rclab/regular.hpp"
#include "rclab/rng.hpp"
#include "rclab/verify.hpp"
