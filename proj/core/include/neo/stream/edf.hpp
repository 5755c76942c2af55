#pragma once

#include <string>

#include "neo/types.hpp"

namespace neo::stream {

/// Reads a continuous EDF file into a microvolt Recording. All selected
/// signals must share one sampling rate; annotation signals are skipped.
/// Physical/digital scaling is applied per the signal headers; physical
/// dimensions V/mV/uV are normalized to microvolts.
Recording read_edf(const std::string& path);

/// Writes a Recording as plain EDF (int16 data records of 1 s).
void write_edf(const std::string& path, const Recording& rec);

}  // namespace neo::stream
