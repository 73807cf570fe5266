// Copyright 2026 The kgrd Authors. All Rights Reserved.
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

#ifndef KGRD_KGRD_HPP
#define KGRD_KGRD_HPP

#include "kgrd/communities.hpp"
#include "kgrd/config.hpp"
#include "kgrd/embed.hpp"
#include "kgrd/error.hpp"
#include "kgrd/io.hpp"
#include "kgrd/kg.hpp"
#include "kgrd/matrix.hpp"
#include "kgrd/pipeline.hpp"
#include "kgrd/predict.hpp"
#include "kgrd/quality.hpp"
#include "kgrd/sim.hpp"
#include "kgrd/synth.hpp"

#endif  // KGRD_KGRD_HPP
