// Copyright 2026 The mtpack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Pulls in the whole library.
#include "mtpack/core.hpp"
#include "mtpack/utility.hpp"
#include "mtpack/network.hpp"
#include "mtpack/tree.hpp"
#include "mtpack/exact.hpp"
#include "mtpack/steiner_approx.hpp"
#include "mtpack/oracle.hpp"
#include "mtpack/optimizer.hpp"
#include "mtpack/colgen.hpp"
#include "mtpack/bounds.hpp"
#include "mtpack/simulator.hpp"
#include "mtpack/instances.hpp"
#include "mtpack/scenario.hpp"
#include "mtpack/report.hpp"
