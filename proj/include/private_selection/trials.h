// Copyright 2026 The Private Selection Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel trial runner. Trial i always uses substream i of the root stream,
// so results do not depend on the worker count.

#ifndef PRIVATE_SELECTION_TRIALS_H_
#define PRIVATE_SELECTION_TRIALS_H_

#include <algorithm>
#include <cstdint>
#include <thread>
#include <type_traits>
#include <vector>

#include "private_selection/core.h"

namespace private_selection {

// Worker count: hardware concurrency, capped by PRIVATE_SELECT_THREADS.
int WorkerCount();

template <typename Fn>
auto RunTrials(int64_t trials, const RandomStream& root, Fn fn)
    -> std::vector<std::invoke_result_t<Fn&, int64_t, RandomStream&>> {
  using Result = std::invoke_result_t<Fn&, int64_t, RandomStream&>;
  std::vector<Result> results(static_cast<size_t>(std::max<int64_t>(0, trials)));
  const int workers = static_cast<int>(
      std::min<int64_t>(WorkerCount(), std::max<int64_t>(1, trials)));
  auto run_range = [&](int w) {
    for (int64_t i = w; i < trials; i += workers) {
      RandomStream rng = root.Substream(static_cast<uint64_t>(i));
      results[static_cast<size_t>(i)] = fn(i, rng);
    }
  };
  if (workers <= 1) {
    run_range(0);
    return results;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(run_range, w);
  for (std::thread& t : pool) t.join();
  return results;
}

}  // namespace private_selection

#endif  // PRIVATE_SELECTION_TRIALS_H_
