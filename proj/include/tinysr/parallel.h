// Copyright 2026 The tinysr Authors.
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

#ifndef TINYSR_PARALLEL_H_
#define TINYSR_PARALLEL_H_

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tinysr {

// Runs fn(begin, end) over `jobs` contiguous index blocks. Block
// boundaries depend only on (n, jobs), so callers that reduce block
// results in block order stay deterministic for a fixed job count.
template <typename Fn>
void parallel_blocks(std::size_t n, int jobs, Fn&& fn) {
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || n <= 1) {
    if (n > 0) fn(0, std::size_t{0}, n);
    return;
  }
  const std::size_t num_blocks =
      std::min(static_cast<std::size_t>(jobs), n);
  const std::size_t per = (n + num_blocks - 1) / num_blocks;

  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> threads;
  threads.reserve(num_blocks);
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const std::size_t begin = b * per;
    const std::size_t end = std::min(n, begin + per);
    if (begin >= end) break;
    threads.emplace_back([&, b, begin, end] {
      try {
        fn(b, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace tinysr

#endif  // TINYSR_PARALLEL_H_
