// Copyright 2026 The sculpt authors
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

#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace sculpt {

/// Worker thread cap, from SCULPTD_THREADS. Defaults to 1 (sequential).
inline int worker_thread_count() {
  static const int cached = [] {
    if (const char* env = std::getenv("SCULPTD_THREADS")) {
      const int n = std::atoi(env);
      if (n >= 1) return n;
    }
    return 1;
  }();
  return cached;
}

/// Runs fn(y0, y1) over contiguous row shards. Shards write disjoint rows, so
/// results are identical to the sequential order regardless of thread count.
template <typename Fn>
void parallel_rows(int height, Fn&& fn) {
  const int threads = std::min(worker_thread_count(), height);
  if (threads <= 1) {
    fn(0, height);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int per = (height + threads - 1) / threads;
  for (int i = 0; i < threads; ++i) {
    const int y0 = i * per;
    const int y1 = std::min(height, y0 + per);
    if (y0 >= y1) break;
    pool.emplace_back([&fn, y0, y1] { fn(y0, y1); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace sculpt
