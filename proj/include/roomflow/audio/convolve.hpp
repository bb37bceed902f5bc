#pragma once

#include <span>
#include <vector>

#include "roomflow/audio/audio_buffer.hpp"

namespace roomflow::audio {

// Full linear convolution, length len(signal) + len(kernel) - 1. Kernels
// longer than a few dozen taps go through uniformly partitioned FFT
// overlap-add; shorter ones are summed directly. Throws RateError when the
// sample rates differ.
AudioBuffer convolve(const AudioBuffer& signal, const AudioBuffer& kernel);

std::vector<double> convolve(std::span<const double> signal,
                             std::span<const double> kernel);

// Partition length used for a kernel of the given size.
std::size_t partition_size(std::size_t kernel_size);

}  // namespace roomflow::audio
