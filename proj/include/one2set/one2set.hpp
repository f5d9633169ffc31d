// Copyright 2026 The One2Set Authors.
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

#include "one2set/assignment.hpp"
#include "one2set/autograd.hpp"
#include "one2set/checkpoint.hpp"
#include "one2set/config.hpp"
#include "one2set/corpus.hpp"
#include "one2set/decoding.hpp"
#include "one2set/evaluation.hpp"
#include "one2set/hungarian.hpp"
#include "one2set/loss.hpp"
#include "one2set/model.hpp"
#include "one2set/optimizer.hpp"
#include "one2set/porter.hpp"
#include "one2set/synthetic.hpp"
#include "one2set/tensor.hpp"
#include "one2set/trainer.hpp"
#include "one2set/vocabulary.hpp"
