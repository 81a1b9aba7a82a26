// Copyright (c) 2026 The rawlume Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace rawlume {

// Worker count for row-parallel loops. RAWLUME_THREADS caps it; unset or
// invalid values fall back to the hardware concurrency.
inline int worker_count() {
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw <= 0) hw = 1;
    if (const char* env = std::getenv("RAWLUME_THREADS")) {
        try {
            int cap = std::stoi(env);
            if (cap >= 1) return std::min(cap, hw);
        } catch (const std::exception&) {
        }
    }
    return hw;
}

// Runs fn(i) for i in [begin, end) split into contiguous chunks. Each index is
// visited exactly once, so loops that only write slot i stay deterministic.
template <typename Fn>
void parallel_for(int begin, int end, Fn&& fn, int min_chunk = 16) {
    const int n = end - begin;
    if (n <= 0) return;
    const int workers = std::min(worker_count(), std::max(1, n / std::max(1, min_chunk)));
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi, w] {
            try {
                for (int i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace rawlume
