// Copyright (c) 2026 The rawlume Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "rawlume/bilateral_grid.hpp"
#include "rawlume/coeff_optimizer.hpp"
#include "rawlume/color_transform.hpp"
#include "rawlume/enhancer.hpp"
#include "rawlume/error.hpp"
#include "rawlume/image.hpp"
#include "rawlume/io.hpp"
#include "rawlume/joint_op.hpp"
#include "rawlume/metrics.hpp"
#include "rawlume/noise_model.hpp"
#include "rawlume/parallel.hpp"
#include "rawlume/pipeline.hpp"
#include "rawlume/profile.hpp"
#include "rawlume/random.hpp"
#include "rawlume/raw_core.hpp"
