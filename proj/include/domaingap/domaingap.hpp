// Copyright 2026 The domaingap Authors.
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

#include "domaingap/adaptation.hpp"
#include "domaingap/conversion.hpp"
#include "domaingap/error.hpp"
#include "domaingap/eval.hpp"
#include "domaingap/geometry.hpp"
#include "domaingap/intermediate.hpp"
#include "domaingap/json_io.hpp"
#include "domaingap/kitti_io.hpp"
#include "domaingap/parallel.hpp"
#include "domaingap/point_cloud.hpp"
#include "domaingap/rng.hpp"
#include "domaingap/synth.hpp"
