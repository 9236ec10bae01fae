// Copyright 2026 The mecasim Authors
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

#include "mecasim/cmaes.hpp"
#include "mecasim/config.hpp"
#include "mecasim/control.hpp"
#include "mecasim/csv.hpp"
#include "mecasim/fixtures.hpp"
#include "mecasim/gradient.hpp"
#include "mecasim/identify.hpp"
#include "mecasim/lbfgsb.hpp"
#include "mecasim/loss.hpp"
#include "mecasim/mlp.hpp"
#include "mecasim/model.hpp"
#include "mecasim/nelder_mead.hpp"
#include "mecasim/spline.hpp"
#include "mecasim/svg.hpp"
#include "mecasim/types.hpp"
