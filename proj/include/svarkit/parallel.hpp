#pragma once

namespace svarkit {

/// Worker count for OpenMP kernels. Defaults to the runtime maximum, capped
/// by the SVARKIT_THREADS environment variable when set.
int worker_count();

/// Override the worker count for the current process (0 restores default).
void set_worker_count(int n);

}  // namespace svarkit
