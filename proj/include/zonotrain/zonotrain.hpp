/*
 * Copyright 2026 The zonotrain Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ZONOTRAIN_ZONOTRAIN_HPP
#define ZONOTRAIN_ZONOTRAIN_HPP

#include "zonotrain/attack.hpp"
#include "zonotrain/csv.hpp"
#include "zonotrain/data.hpp"
#include "zonotrain/enclosure.hpp"
#include "zonotrain/error.hpp"
#include "zonotrain/net.hpp"
#include "zonotrain/optim.hpp"
#include "zonotrain/set_loss.hpp"
#include "zonotrain/set_propagation.hpp"
#include "zonotrain/train.hpp"
#include "zonotrain/verify.hpp"
#include "zonotrain/zonoset.hpp"

#endif
