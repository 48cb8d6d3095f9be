#pragma once

namespace cpdd {

/// Selects between the OpenMP kernel and its serial reference.
/// Both paths evaluate identical per-item work and reduce in index order,
/// so their results are bit-identical.
enum class Exec { Serial, Parallel };

/// Sets the OpenMP worker count; n <= 0 keeps the runtime default.
void set_thread_count(int n);
int thread_count();

}  // namespace cpdd
