// Copyright 2026 The BossNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Umbrella header.

#ifndef BOSSNET_BOSSNET_HPP_
#define BOSSNET_BOSSNET_HPP_

#include "bossnet/babi_synth.hpp"
#include "bossnet/boss_memory.hpp"
#include "bossnet/checkpoint.hpp"
#include "bossnet/common.hpp"
#include "bossnet/config.hpp"
#include "bossnet/corpus.hpp"
#include "bossnet/decoder.hpp"
#include "bossnet/encoder.hpp"
#include "bossnet/gru.hpp"
#include "bossnet/ka_perturb.hpp"
#include "bossnet/metrics.hpp"
#include "bossnet/model.hpp"
#include "bossnet/parameters.hpp"
#include "bossnet/training.hpp"
#include "bossnet/vocabulary.hpp"

#endif  // BOSSNET_BOSSNET_HPP_
