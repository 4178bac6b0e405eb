/*
 * Copyright 2026 The cfhybrid Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CFHYBRID_HPP
#define CFHYBRID_HPP

#include "cfhybrid/cf_core.hpp"
#include "cfhybrid/cf_enum.hpp"
#include "cfhybrid/cf_hybrid.hpp"
#include "cfhybrid/cf_moc.hpp"
#include "cfhybrid/cf_nice.hpp"
#include "cfhybrid/cohort.hpp"
#include "cfhybrid/common.hpp"
#include "cfhybrid/evaluation.hpp"
#include "cfhybrid/gbm.hpp"
#include "cfhybrid/predictor.hpp"
#include "cfhybrid/random.hpp"
#include "cfhybrid/tabular.hpp"
#include "cfhybrid/tabular_io.hpp"

#endif  // CFHYBRID_HPP
