// Copyright 2026 The contmeas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace contmeas {

/// Philox4x32-10 block function: a keyed bijection on 128-bit counters.
struct Philox4x32
{
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key);
};

/*!
 * Deterministic Gaussian noise addressed by (seed, stream, index).
 *
 * The 64-bit seed is the Philox key. Draw `index` lives in Philox block
 * index / 2, with counter words (block_lo, block_hi, stream_lo, stream_hi);
 * the two uniforms of a block feed one Box-Muller pair and index % 2 picks the
 * cosine or sine branch. Any draw can be recomputed in isolation, so results
 * never depend on the order or thread in which streams are consumed.
 *
 * Trajectory i of an ensemble with base seed s uses stream i under seed s.
 */
class NoiseStream
{
public:
    NoiseStream(std::uint64_t seed, std::uint64_t stream);

    /// Standard normal variate number `index` of this stream.
    double normal(std::uint64_t index) const;

    /// Uniform in [0, 1) built from 53 random bits; draw `index` shares a block with `index ^ 1`.
    double uniform(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

private:
    Philox4x32::Counter block(std::uint64_t block_index) const;

    std::uint64_t seed_;
    std::uint64_t stream_;
    Philox4x32::Key key_;
};

/// sqrt(dt) * N(0, 1) increments for steps 0..n_steps-1 of the given stream.
std::vector<double> wiener_increments(std::uint64_t seed, std::uint64_t stream, std::size_t n_steps, double dt);

/// Sums consecutive groups of `factor` increments (coarse Brownian path from a fine one).
std::vector<double> coarsen_increments(const std::vector<double>& fine, std::size_t factor);

}  // namespace contmeas
