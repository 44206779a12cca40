/*
 * This file is part of rpchol, a library for randomly pivoted low-rank
 * matrix approximation.
 *
 * Copyright (c) 2026 the rpchol authors.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the
 * project root for license information.
 */
#ifndef RPCHOL_RPCHOL_HPP
#define RPCHOL_RPCHOL_HPP

#include "rpchol/bounds.hpp"
#include "rpchol/data_matrix.hpp"
#include "rpchol/datasets.hpp"
#include "rpchol/experiment.hpp"
#include "rpchol/io.hpp"
#include "rpchol/kernels.hpp"
#include "rpchol/krr.hpp"
#include "rpchol/oracle.hpp"
#include "rpchol/parallel.hpp"
#include "rpchol/rng.hpp"
#include "rpchol/rpcholesky.hpp"
#include "rpchol/rpqr.hpp"

#endif  // RPCHOL_RPCHOL_HPP
