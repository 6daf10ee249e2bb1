#ifndef STOKES_TRACE_IO_HPP
#define STOKES_TRACE_IO_HPP

#include <filesystem>
#include <string>

#include "stokes/trace.hpp"

namespace stokes {

// Trace CSV: UTF-8, comma separated, '.' decimal, header "trace_1,trace_2,...",
// one row per time sample, one column per replicate trace.
TraceSet load_trace_file(const std::filesystem::path& path, double dt);
void write_trace_file(const std::filesystem::path& path, const TraceSet& set);

// Manifest is a JSON key-value tree; referenced trace files are resolved
// relative to the manifest's directory and fully loaded.
SweepDataset load_manifest(const std::filesystem::path& path);

// Half-wave-plate setting selecting the quadrature theta: pi/8 + theta/4,
// reduced to [0, pi).
double waveplate_angle(double theta);

} // namespace stokes

#endif
