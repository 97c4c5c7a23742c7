#include "orange/split.hpp"

#include <cmath>
#include <vector>

#include "orange/error.hpp"
#include "orange/rng.hpp"

namespace orange {

void SplitSpec::validate() const {
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "train fraction must be in (0, 1]");
    }
}

std::size_t train_count(std::size_t class_size, double fraction) {
    const double raw = std::floor(fraction * static_cast<double>(class_size) + 0.5 + 1e-9);
    if (raw <= 0.0) return 0;
    return std::min(class_size, static_cast<std::size_t>(raw));
}

SplitResult stratified_split(const Dataset& dataset, const SplitSpec& spec) {
    spec.validate();
    if (dataset.empty()) throw Error(ErrorCode::EmptyDataset, "cannot split an empty dataset");

    SplitResult result;
    for (std::size_t c = 0; c < kNumGrades; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < dataset.size(); ++i) {
            if (index_of(dataset[i].label) == c) members.push_back(i);
        }
        Rng rng(derive_seed(spec.seed, c));
        shuffle(std::span<std::size_t>(members), rng);
        const auto n_train = train_count(members.size(), spec.train_fraction);
        for (std::size_t k = 0; k < members.size(); ++k) {
            (k < n_train ? result.train : result.test).add(dataset[members[k]]);
        }
    }
    return result;
}

}  // namespace orange
