#pragma once

namespace xmodal {

/// Number of threads parallel loops may use. Reads XMODAL_THREADS once: a
/// positive value caps the pool, 0 or unset means all available cores.
int worker_threads();

}  // namespace xmodal
