/* Copyright 2026 The MMD Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

  http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Umbrella header for the library modules (the CLI lives in mmd/cli.hpp).

#pragma once

#include "mmd/core_model.hpp"
#include "mmd/diagnostics.hpp"
#include "mmd/dsa.hpp"
#include "mmd/errors.hpp"
#include "mmd/io.hpp"
#include "mmd/parallel.hpp"
#include "mmd/rdbr_oracle.hpp"
#include "mmd/rdsa.hpp"
#include "mmd/siggen.hpp"
#include "mmd/spectral.hpp"
