#pragma once

#include "racebias/error.hpp"
#include "racebias/arith.hpp"
#include "racebias/residue.hpp"
#include "racebias/primes.hpp"
#include "racebias/special.hpp"
#include "racebias/zeros.hpp"
#include "racebias/explicit.hpp"
#include "racebias/wasserstein.hpp"
#include "racebias/limiting.hpp"
#include "racebias/primality.hpp"
#include "racebias/chowla.hpp"
#include "racebias/race.hpp"
#include "racebias/pipeline.hpp"
