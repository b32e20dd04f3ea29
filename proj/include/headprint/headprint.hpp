// Copyright 2026 The headprint Authors
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

#include "headprint/error.hpp"
#include "headprint/fingerprint.hpp"
#include "headprint/fingerprint_io.hpp"
#include "headprint/geometry.hpp"
#include "headprint/harness.hpp"
#include "headprint/matcher.hpp"
#include "headprint/openworld.hpp"
#include "headprint/seed.hpp"
#include "headprint/simulate.hpp"
#include "headprint/trace.hpp"
#include "headprint/trace_io.hpp"
