// Copyright 2026 The langevin-kl Authors
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
#include <cmath>
#include <cstdint>
#include <numbers>

#include "langevin_kl/types.hpp"

namespace langevin
{

    /// Philox4x32 with 10 rounds (Salmon et al., SC'11). A keyed bijection on
    /// 128-bit counters, so any (key, counter) pair can be evaluated directly.
    class Philox4x32
    {
    public:
        typedef std::array<std::uint32_t, 4> Counter;
        typedef std::array<std::uint32_t, 2> Key;

        static Counter apply(Counter ctr, Key key)
        {
            for (int round = 0; round < 10; ++round)
            {
                if (round > 0)
                {
                    key[0] += kWeyl0;
                    key[1] += kWeyl1;
                }
                const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
                const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
                ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
                       std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
            }
            return ctr;
        }

    private:
        static constexpr std::uint32_t kMul0 = 0xD2511F53u;
        static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
        static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
        static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
    };

    /// Standard-normal draws addressed by (seed, stream, substream). The chain
    /// engine uses stream = chain index and substream = step index, so the
    /// noise a chain sees never depends on how chains are scheduled.
    class NormalStream
    {
    public:
        NormalStream(std::uint64_t seed, std::uint64_t stream, std::uint32_t substream)
            : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
              stream_(stream), substream_(substream)
        {
        }

        /// Fills out with i.i.d. N(0, 1) values. Repeated calls continue the stream.
        template <typename Derived>
        void fill(Eigen::DenseBase<Derived> &out)
        {
            for (Index i = 0; i < out.size(); ++i)
                out.coeffRef(i) = next();
        }

        double next()
        {
            if (have_spare_)
            {
                have_spare_ = false;
                return spare_;
            }
            const Philox4x32::Counter r = Philox4x32::apply(
                {block_++, substream_, std::uint32_t(stream_), std::uint32_t(stream_ >> 32)}, key_);
            // Box-Muller on two 53-bit uniforms; u1 in (0, 1] keeps log finite.
            const double u1 = (double(to_u53(r[0], r[1])) + 1.0) * 0x1.0p-53;
            const double u2 = double(to_u53(r[2], r[3])) * 0x1.0p-53;
            const double radius = std::sqrt(-2.0 * std::log(u1));
            const double angle = 2.0 * std::numbers::pi * u2;
            spare_ = radius * std::sin(angle);
            have_spare_ = true;
            return radius * std::cos(angle);
        }

    private:
        static std::uint64_t to_u53(std::uint32_t hi, std::uint32_t lo)
        {
            return ((std::uint64_t(hi) << 32) | lo) >> 11;
        }

        Philox4x32::Key key_;
        std::uint64_t stream_;
        std::uint32_t substream_;
        std::uint32_t block_ = 0;
        double spare_ = 0.0;
        bool have_spare_ = false;
    };

} // namespace langevin
