#pragma once

#include "epr/autotune.hpp"
#include "epr/descriptor_set.hpp"
#include "epr/engine.hpp"
#include "epr/errors.hpp"
#include "epr/eval.hpp"
#include "epr/io.hpp"
#include "epr/similarity.hpp"
#include "epr/sparse_matrix.hpp"
#include "epr/synthetic.hpp"
