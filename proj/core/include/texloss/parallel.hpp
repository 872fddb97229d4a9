#pragma once

#include <functional>

namespace texloss {

// Worker count used for per-cell parallelism.  Reads TEXLOSS_THREADS once
// (values < 1 or non-numeric fall back to the hardware concurrency).
int thread_count();

// Runs fn(i) for i in [0, n).  With one worker this is a plain loop; with
// more, indices are split into contiguous blocks, one thread per block.
// fn must be safe to call concurrently for distinct i.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace texloss
