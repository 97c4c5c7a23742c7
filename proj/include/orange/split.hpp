#pragma once

#include <cstddef>
#include <cstdint>

#include "orange/domain.hpp"

namespace orange {

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitResult {
    Dataset train;
    Dataset test;
};

// round_half_up(fraction * class_size), clamped to [0, class_size]. A 1e-9
// slack absorbs binary representation error so decimal fractions such as
// 0.7 * 5 = 3.5 round up as written.
std::size_t train_count(std::size_t class_size, double fraction);

// Stratified split on sample ids. For class index c the samples of that
// class (in dataset order) are permuted by Fisher-Yates driven by
// xoshiro256** seeded with derive_seed(seed, c); the first train_count()
// go to train. Output is class-major (Good, Bad, Undefined), each class in
// permuted order. Throws EmptyDataset.
SplitResult stratified_split(const Dataset& dataset, const SplitSpec& spec);

}  // namespace orange
