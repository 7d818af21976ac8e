#pragma once

#include "dyadlab/bellman.hpp"
#include "dyadlab/characteristics.hpp"
#include "dyadlab/constructions.hpp"
#include "dyadlab/dyadic.hpp"
#include "dyadlab/embeddings.hpp"
#include "dyadlab/errors.hpp"
#include "dyadlab/matrix.hpp"
#include "dyadlab/redundancy.hpp"
#include "dyadlab/sequences.hpp"
#include "dyadlab/serialize.hpp"
#include "dyadlab/weight.hpp"
