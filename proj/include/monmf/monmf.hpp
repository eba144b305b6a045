#pragma once

// Umbrella header for the monotonous matrix factorization library.

#include "monmf/baselines.hpp"
#include "monmf/constraints.hpp"
#include "monmf/csv.hpp"
#include "monmf/dense_matrix.hpp"
#include "monmf/experiments.hpp"
#include "monmf/factorization.hpp"
#include "monmf/isotonic.hpp"
#include "monmf/linalg.hpp"
#include "monmf/monotonous_nmf.hpp"
#include "monmf/nnls.hpp"
#include "monmf/qp.hpp"
#include "monmf/rng.hpp"
#include "monmf/scenario_io.hpp"
#include "monmf/semi_nmf.hpp"
