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

#ifndef GECAL_PARALLEL_HPP
#define GECAL_PARALLEL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>

namespace gecal {

// Worker count: GECAL_THREADS if set, otherwise the hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n). Calls are independent; the caller stores
// results by index. The first exception thrown by any call is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

std::uint64_t splitmix64(std::uint64_t x);

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return seed ^ splitmix64(index);
}

}  // namespace gecal

#endif  // GECAL_PARALLEL_HPP
