#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spikekern/types.hpp"

namespace spikekern {

/// Boolean event vector for one population at one step.
///
/// Stored as one byte per neuron rather than std::vector<bool> so kernels can
/// test bits without proxy objects.
class SpikeVector {
public:
    SpikeVector() = default;
    explicit SpikeVector(std::size_t n) : bits_(n, 0) {}

    static SpikeVector from_indices(std::size_t n, std::span<const Index> active);
    static SpikeVector from_bits(std::vector<std::uint8_t> bits);

    std::size_t size() const { return bits_.size(); }
    bool operator[](std::size_t i) const { return bits_[i] != 0; }
    void set(std::size_t i, bool on = true) { bits_[i] = on ? 1 : 0; }
    void clear();

    std::size_t count() const;
    std::vector<Index> active() const;
    std::vector<Real> as_real() const;

    std::span<const std::uint8_t> bits() const { return bits_; }
    std::span<std::uint8_t> bits() { return bits_; }

    bool operator==(const SpikeVector&) const = default;

private:
    std::vector<std::uint8_t> bits_;
};

}  // namespace spikekern
