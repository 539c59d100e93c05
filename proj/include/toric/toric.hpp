// Copyright 2026 The Toric Learn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TORIC_TORIC_HPP
#define TORIC_TORIC_HPP

#include "toric/common.hpp"
#include "toric/error_metrics.hpp"
#include "toric/exact_solver.hpp"
#include "toric/fields.hpp"
#include "toric/gibbs_sampler.hpp"
#include "toric/hamiltonian_learner.hpp"
#include "toric/io.hpp"
#include "toric/lanczos.hpp"
#include "toric/lattice.hpp"
#include "toric/neural_regressor.hpp"
#include "toric/phase_analysis.hpp"

#endif  // TORIC_TORIC_HPP
