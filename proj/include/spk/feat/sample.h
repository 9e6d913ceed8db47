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

#include <string>
#include <variant>
#include <vector>

#include "spk/tensor_io.h"
#include "spk/uio/shard.h"

namespace spk::feat {

using Wave = std::vector<float>;

// The unit flowing through the feature pipeline. Before fbank extraction the
// payload is a mono waveform in [-1, 1]; afterwards it is a T x F matrix.
struct Sample {
  std::string key;
  std::string speaker;
  int speaker_id = -1;
  int sample_rate = 0;
  std::variant<Wave, RowMatrixXf> payload;

  bool has_wave() const { return std::holds_alternative<Wave>(payload); }
  bool has_feats() const { return std::holds_alternative<RowMatrixXf>(payload); }
  const Wave& wave() const;
  Wave& wave();
  const RowMatrixXf& feats() const;
};

Sample to_sample(const uio::UtteranceRecord& record);

// B x T x F features with per-row labels and keys.
struct Batch {
  std::vector<std::string> keys;
  std::vector<int> labels;
  std::size_t frames = 0;
  std::size_t dims = 0;
  std::vector<float> feats;

  std::size_t size() const { return keys.size(); }
};

}  // namespace spk::feat
