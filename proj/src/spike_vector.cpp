#include "spikekern/spike_vector.hpp"

#include <algorithm>
#include <string>

namespace spikekern {

SpikeVector SpikeVector::from_indices(std::size_t n, std::span<const Index> active)
{
    SpikeVector s(n);
    for (Index i : active) {
        if (i >= n) throw DimensionError("spike index " + std::to_string(i) + " out of range " + std::to_string(n));
        s.bits_[i] = 1;
    }
    return s;
}

SpikeVector SpikeVector::from_bits(std::vector<std::uint8_t> bits)
{
    SpikeVector s;
    s.bits_ = std::move(bits);
    for (auto& b : s.bits_) b = b ? 1 : 0;
    return s;
}

void SpikeVector::clear()
{
    std::fill(bits_.begin(), bits_.end(), std::uint8_t{0});
}

std::size_t SpikeVector::count() const
{
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
}

std::vector<Index> SpikeVector::active() const
{
    std::vector<Index> out;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i]) out.push_back(static_cast<Index>(i));
    }
    return out;
}

std::vector<Real> SpikeVector::as_real() const
{
    std::vector<Real> out(bits_.size());
    for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = bits_[i] ? Real{1} : Real{0};
    return out;
}

}  // namespace spikekern
