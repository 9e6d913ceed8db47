// Copyright (c) 2026 speakerkit Authors. All Rights Reserved.
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

#include <cstddef>

namespace spk::testing {

// Live heap bytes as seen by the replaced global operator new/delete.
std::size_t live_heap_bytes();
// Highest live_heap_bytes() since the last reset.
std::size_t peak_heap_bytes();
void reset_peak_heap();

}  // namespace spk::testing
