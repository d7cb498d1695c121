// dsu/dsu.hpp

// Copyright 2026  The DSU Toolkit Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Umbrella header for the whole toolkit.

#pragma once

#include "dsu/analysis.hpp"
#include "dsu/bpe.hpp"
#include "dsu/cca.hpp"
#include "dsu/config.hpp"
#include "dsu/errors.hpp"
#include "dsu/fbank.hpp"
#include "dsu/feature_matrix.hpp"
#include "dsu/kmeans.hpp"
#include "dsu/pack.hpp"
#include "dsu/rng.hpp"
#include "dsu/units.hpp"
#include "dsu/wav.hpp"
