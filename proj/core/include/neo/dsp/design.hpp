#pragma once

#include "neo/dsp/biquad.hpp"

namespace neo::dsp {

/// How textual band edges given "relative to the sampling frequency" are
/// interpreted: literally (fraction of fs) or as fractions of Nyquist.
enum class EdgeInterpretation { fs_relative, nyquist_relative };

/// Maximally flat bandpass of prototype order `order` (even), realized as
/// `order` second-order sections (2*order poles). Edges are fractions of
/// the sampling rate, 0 < lo < hi < 0.5.
BiquadCascade design_butterworth_bandpass(int order, double lo_norm,
                                          double hi_norm);

/// Same design with edges in Hz.
BiquadCascade design_butterworth_bandpass_hz(int order, double lo_hz,
                                             double hi_hz, double fs_hz);

/// Second-order notch: zeros on the unit circle at center_hz, pole radius
/// tuned so the -3 dB points sit at center +- bw/2. Unity gain at DC and
/// Nyquist by construction.
BiquadCascade design_notch(double center_hz, double bw_3db_hz, double fs_hz);

/// Inverse-Chebyshev bandpass: equiripple stopband at >= stop_atten_db,
/// monotone passband. `order` is the analog prototype order.
BiquadCascade design_chebyshev2_bandpass(int order, double lo_hz, double hi_hz,
                                         double stop_atten_db, double fs_hz);

/// The full acquisition preprocessing chain: Butterworth bandpass plus
/// 50 Hz and 100 Hz notches (-3 dB width 4 Hz).
BiquadCascade design_preprocessing_chain(
    double fs_hz, EdgeInterpretation interp = EdgeInterpretation::fs_relative,
    int order = 4, double lo_edge = 0.004, double hi_edge = 0.4);

}  // namespace neo::dsp
