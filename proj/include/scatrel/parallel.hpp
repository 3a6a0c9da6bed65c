// Worker-thread budget for internally parallel operations.
#pragma once

namespace scatrel {

// Number of workers parallel sections may use; defaults to the hardware
// concurrency.  Always >= 1.
int worker_threads();

// Cap the budget (0 restores the default).  Set once at startup; not safe to
// change while parallel work is in flight.
void set_worker_threads(int n);

} // namespace scatrel
