// Copyright 2026 The gecal Authors.
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

#ifndef GECAL_DATA_HPP
#define GECAL_DATA_HPP

#include "gecal/linalg.hpp"

namespace gecal {

// Unit-level records split into the always-observed part o and the possibly
// missing part m. Entries of m are only read where delta = 1.
struct MissingData {
  Matrix o;
  Matrix m;
  Vector delta;

  Eigen::Index n() const { return delta.size(); }
  Eigen::Index respondents() const { return static_cast<Eigen::Index>(delta.sum()); }
};

}  // namespace gecal

#endif  // GECAL_DATA_HPP
