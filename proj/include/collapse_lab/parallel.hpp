// Copyright 2026 The collapse-lab Authors
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

#ifndef COLLAPSE_LAB_PARALLEL_HPP
#define COLLAPSE_LAB_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace collapse {

/// Worker count: COLLAPSE_LAB_THREADS if set (>= 1), else the hardware
/// concurrency. set_worker_override() takes precedence over both.
std::size_t worker_count();

/// Pins the worker count for the current process; 0 clears the override.
void set_worker_override(std::size_t workers);

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Bodies must
/// write only to slot i of caller-owned storage; callers fold results in
/// index order afterwards, which keeps output independent of the schedule.
/// The first exception thrown by any body is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace collapse

#endif  // COLLAPSE_LAB_PARALLEL_HPP
