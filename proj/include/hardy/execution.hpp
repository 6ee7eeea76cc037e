#pragma once

namespace hardy {

/// Selects between the OpenMP kernel and the plain serial reference loop.
/// Both produce bit-identical results: work items are independent and all
/// reductions run in a fixed order after the parallel phase.
enum class Exec { serial, parallel };

}  // namespace hardy
