#pragma once

#include <cstdint>

#include "bmvdr/stft.hpp"

namespace bmvdr {

// Deterministic speech-like test signal: sentences of voiced/unvoiced
// syllables shaped by formant resonators, separated by ~0.5 s pauses, with
// `leading_silence` seconds of silence at the start. Peak amplitude 0.5.
Samples synthetic_speech(double sample_rate, double duration, std::uint64_t seed, double leading_silence = 0.5);

}  // namespace bmvdr
