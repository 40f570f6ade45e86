/*
 *  Copyright 2026 The slicesim Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include "slicesim/common.hpp"
#include "slicesim/event_queue.hpp"
#include "slicesim/messages.hpp"
#include "slicesim/metrics.hpp"
#include "slicesim/nf.hpp"
#include "slicesim/procedures.hpp"
#include "slicesim/run.hpp"
#include "slicesim/scenario.hpp"
#include "slicesim/simulator.hpp"
#include "slicesim/slice_model.hpp"
#include "slicesim/switching.hpp"
#include "slicesim/trace.hpp"
#include "slicesim/triggers.hpp"
