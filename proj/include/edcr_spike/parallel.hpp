#pragma once

namespace edcr_spike {

// Scheduling of the data-parallel kernels. Results never depend on it.
enum class Exec { serial, parallel };

// Caps the OpenMP worker count (no-op without OpenMP). n < 1 restores the default.
void set_thread_cap(int n);

// Reads EDCR_SPIKE_THREADS; returns 0 when unset or invalid.
int thread_cap_from_env();

int max_threads();

}  // namespace edcr_spike
