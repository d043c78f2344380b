// Copyright 2026 The cellbox Authors
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

#include "cellbox/crop.hpp"
#include "cellbox/error.hpp"
#include "cellbox/eval.hpp"
#include "cellbox/geometry.hpp"
#include "cellbox/io.hpp"
#include "cellbox/jitter.hpp"
#include "cellbox/matching.hpp"
#include "cellbox/postprocess.hpp"
#include "cellbox/random.hpp"
#include "cellbox/simulate.hpp"
#include "cellbox/size_opt.hpp"
#include "cellbox/types.hpp"
