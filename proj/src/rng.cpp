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

#include "contmeas/rng.hpp"

#include <cmath>
#include <numbers>

#include "contmeas/errors.hpp"

namespace contmeas {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter c, Key k)
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed),
      stream_(stream),
      key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
{
}

Philox4x32::Counter NoiseStream::block(std::uint64_t block_index) const
{
    return Philox4x32::generate({static_cast<std::uint32_t>(block_index), static_cast<std::uint32_t>(block_index >> 32),
                                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                key_);
}

double NoiseStream::normal(std::uint64_t index) const
{
    const auto r = block(index >> 1);
    // u1 in (0, 1] keeps the log finite.
    const double u1 = 1.0 - to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return (index & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
}

double NoiseStream::uniform(std::uint64_t index) const
{
    const auto r = block(index >> 1);
    return (index & 1u) ? to_unit(r[2], r[3]) : to_unit(r[0], r[1]);
}

std::vector<double> wiener_increments(std::uint64_t seed, std::uint64_t stream, std::size_t n_steps, double dt)
{
    if (!(dt > 0.0)) {
        throw StepSizeInvalid("wiener_increments: dt must be positive");
    }
    const NoiseStream noise(seed, stream);
    const double scale = std::sqrt(dt);
    std::vector<double> out(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        out[k] = scale * noise.normal(k);
    }
    return out;
}

std::vector<double> coarsen_increments(const std::vector<double>& fine, std::size_t factor)
{
    if (factor == 0 || fine.size() % factor != 0) {
        throw LengthMismatch("coarsen_increments: " + std::to_string(fine.size()) + " increments are not divisible by " +
                             std::to_string(factor));
    }
    std::vector<double> out(fine.size() / factor, 0.0);
    for (std::size_t k = 0; k < fine.size(); ++k) {
        out[k / factor] += fine[k];
    }
    return out;
}

}  // namespace contmeas
