#include "xsim/similarity.hpp"

#include "xsim/error.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace xsim {

namespace {

void require_equal_lengths(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("distance needs equal lengths, got " + std::to_string(a.size()) + " and " +
                                    std::to_string(b.size()));
    }
}

}  // namespace

double distance_l1(std::span<const double> a, std::span<const double> b) {
    require_equal_lengths(a, b);
    double sum = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        sum += std::abs(a[t] - b[t]);
    }
    return sum;
}

double distance_l2(std::span<const double> a, std::span<const double> b) {
    require_equal_lengths(a, b);
    double sum = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) {
        const double d = a[t] - b[t];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double distance_dtw(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("DTW needs non-empty series");
    }
    const std::size_t cols = b.size();
    std::vector<double> prev(cols);
    std::vector<double> curr(cols);

    prev[0] = std::abs(a[0] - b[0]);
    for (std::size_t w = 1; w < cols; ++w) {
        prev[w] = std::abs(a[0] - b[w]) + prev[w - 1];
    }
    for (std::size_t v = 1; v < a.size(); ++v) {
        curr[0] = std::abs(a[v] - b[0]) + prev[0];
        for (std::size_t w = 1; w < cols; ++w) {
            const double best = std::min({curr[w - 1], prev[w - 1], prev[w]});
            curr[w] = std::abs(a[v] - b[w]) + best;
        }
        std::swap(prev, curr);
    }
    return prev[cols - 1];
}

double distance(DistanceKind kind, std::span<const double> a, std::span<const double> b) {
    switch (kind) {
    case DistanceKind::L1:
        return distance_l1(a, b);
    case DistanceKind::L2:
        return distance_l2(a, b);
    case DistanceKind::DTW:
        return distance_dtw(a, b);
    }
    throw std::invalid_argument("unknown distance kind");
}

NeighborSearch nearest_k(std::span<const double> target, const ReferenceSet& references, DistanceKind kind,
                         std::size_t k, unsigned threads) {
    if (k < 1) {
        throw std::invalid_argument("k must be >= 1");
    }
    const auto entries = references.entries();
    if (entries.empty()) {
        throw DataError("empty reference set");
    }

    std::vector<Neighbor> all(entries.size());
    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            all[i] = {i, distance(kind, target, entries[i].preprocessed.scaled)};
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(threads, 1, entries.size());
    if (workers == 1) {
        work(0, entries.size());
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        const std::size_t chunk = (entries.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            const std::size_t end = std::min(entries.size(), begin + chunk);
            if (begin < end) {
                pool.emplace_back(work, begin, end);
            }
        }
    }

    NeighborSearch out;
    out.truncated = k > all.size();
    const std::size_t take = std::min(k, all.size());
    auto closer = [](const Neighbor& x, const Neighbor& y) {
        return x.distance < y.distance || (x.distance == y.distance && x.index < y.index);
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), closer);
    all.resize(take);
    out.neighbors = std::move(all);
    return out;
}

}  // namespace xsim
