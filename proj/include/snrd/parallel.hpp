// snrd/parallel.hpp

// Copyright 2026   snrd authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SNRD_PARALLEL_HPP_
#define SNRD_PARALLEL_HPP_

#include <cstddef>
#include <exception>
#include <functional>

namespace snrd {

/// Worker cap: SNRD_THREADS if set and positive, else the hardware count.
int worker_count();

/// Overrides the worker cap for the current process (0 restores the default).
void set_worker_count(int n);

/// Runs body(i) for i in [0, n). Each index is handled by exactly one worker;
/// callers write results into per-index slots and reduce them afterwards in
/// index order, so output never depends on the worker count. The first
/// exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);

}  // namespace snrd

#endif  // SNRD_PARALLEL_HPP_
