#include "faery/evo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "faery/error.hpp"

namespace faery::evo {

namespace {

void check_arity(std::span<const ObjectiveVector> points) {
    for (const auto& p : points) {
        if (p.size() != points.front().size()) {
            throw DimensionMismatch("objective vector", points.front().size(), p.size());
        }
    }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

} // namespace

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) {
            return false;
        }
        if (a[i] > b[i]) {
            strictly = true;
        }
    }
    return strictly;
}

std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ObjectiveVector> points) {
    if (points.empty()) {
        throw Error("non_dominated_sort: empty point set");
    }
    check_arity(points);

    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> counts(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(points[p], points[q])) {
                dominated[p].push_back(q);
                ++counts[q];
            } else if (dominates(points[q], points[p])) {
                dominated[q].push_back(p);
                ++counts[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (counts[p] == 0) {
            fronts[0].push_back(p);
        }
    }
    while (true) {
        std::vector<std::size_t> next;
        for (auto p : fronts.back()) {
            for (auto q : dominated[p]) {
                if (--counts[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        if (next.empty()) {
            break;
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    if (front.empty()) {
        return {};
    }
    check_arity(front);
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }

    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < front.front().size(); ++m) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return front[a][m] < front[b][m]; });
        dist[order.front()] = inf;
        dist[order.back()] = inf;

        double lo = inf;
        double hi = -inf;
        for (const auto& p : front) {
            if (std::isfinite(p[m])) {
                lo = std::min(lo, p[m]);
                hi = std::max(hi, p[m]);
            }
        }
        const double range = hi - lo;
        for (std::size_t r = 1; r + 1 < n; ++r) {
            const double prev = front[order[r - 1]][m];
            const double next = front[order[r + 1]][m];
            double gap;
            if (prev == next) {
                gap = 0.0;
            } else if (!std::isfinite(prev) || !std::isfinite(next)) {
                gap = inf;
            } else {
                gap = (next - prev) / range;
            }
            dist[order[r]] += gap;
        }
    }
    return dist;
}

std::vector<std::size_t> nsga2_select(std::span<const ObjectiveVector> points, std::size_t mu) {
    if (mu > points.size()) {
        throw Error("nsga2_select: mu (" + std::to_string(mu) + ") exceeds candidate count (" +
                    std::to_string(points.size()) + ")");
    }
    std::vector<std::size_t> chosen;
    if (mu == 0) {
        return chosen;
    }
    chosen.reserve(mu);
    for (const auto& front : non_dominated_sort(points)) {
        if (chosen.size() + front.size() <= mu) {
            chosen.insert(chosen.end(), front.begin(), front.end());
            if (chosen.size() == mu) {
                break;
            }
            continue;
        }
        std::vector<ObjectiveVector> members;
        members.reserve(front.size());
        for (auto i : front) {
            members.push_back(points[i]);
        }
        const auto crowd = crowding_distance(members);
        std::vector<std::size_t> order(front.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (crowd[a] != crowd[b]) {
                return crowd[a] > crowd[b];
            }
            return front[a] < front[b];
        });
        for (std::size_t r = 0; chosen.size() < mu; ++r) {
            chosen.push_back(front[order[r]]);
        }
        break;
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

NoveltyArchive::NoveltyArchive(std::size_t capacity, std::size_t k, EvictionPolicy policy)
    : capacity_(capacity), k_(k), policy_(policy) {
    if (k_ == 0) {
        throw ConfigError("novelty archive: k must be >= 1");
    }
}

void NoveltyArchive::insert(std::span<const Descriptor> batch, Rng& rng) {
    for (const auto& b : batch) {
        if (dim_ == 0 && behaviors_.empty()) {
            dim_ = b.size();
        } else if (b.size() != dim_) {
            throw DimensionMismatch("behavior descriptor", dim_, b.size());
        }
        behaviors_.push_back(b);
    }
    if (behaviors_.size() <= capacity_) {
        return;
    }
    if (policy_ == EvictionPolicy::fifo) {
        const auto excess = static_cast<std::ptrdiff_t>(behaviors_.size() - capacity_);
        behaviors_.erase(behaviors_.begin(), behaviors_.begin() + excess);
        return;
    }
    while (behaviors_.size() > capacity_) {
        const std::size_t victim = rng.index(behaviors_.size());
        behaviors_[victim] = std::move(behaviors_.back());
        behaviors_.pop_back();
    }
}

NoveltyArchive archive_insert(NoveltyArchive archive, std::span<const Descriptor> batch, Rng& rng) {
    archive.insert(batch, rng);
    return archive;
}

std::vector<double> novelty_scores(std::span<const Descriptor> population, const NoveltyArchive& archive) {
    return novelty_scores(population, archive.behaviors(), archive.k());
}

std::vector<double> novelty_scores(std::span<const Descriptor> population, std::span<const Descriptor> archive,
                                   std::size_t k) {
    if (k == 0) {
        throw ConfigError("novelty: k must be >= 1");
    }
    const std::size_t n = population.size();
    std::vector<double> scores(n, 0.0);
    if (n == 0) {
        return scores;
    }
    const std::size_t dim = population.front().size();
    for (const auto& d : population) {
        if (d.size() != dim) {
            throw DimensionMismatch("behavior descriptor", dim, d.size());
        }
    }
    for (const auto& d : archive) {
        if (d.size() != dim) {
            throw DimensionMismatch("archive descriptor", dim, d.size());
        }
    }

    // Population first, then archive, packed contiguously.
    const std::size_t total = n + archive.size();
    std::vector<double> flat;
    flat.reserve(total * dim);
    for (const auto& d : population) flat.insert(flat.end(), d.begin(), d.end());
    for (const auto& d : archive) flat.insert(flat.end(), d.begin(), d.end());

    const std::size_t kk = std::min(k, total - 1);
    if (kk == 0) return scores;
    // Ascending k smallest squared distances seen so far.
    std::vector<double> best(kk);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = flat.data() + i * dim;
        std::size_t filled = 0;
        for (std::size_t j = 0; j < total; ++j) {
            if (j == i) continue;
            const double* xj = flat.data() + j * dim;
            double d2 = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double diff = xi[c] - xj[c];
                d2 += diff * diff;
            }
            if (filled == kk && d2 >= best[kk - 1]) continue;
            std::size_t pos = filled < kk ? filled++ : kk - 1;
            while (pos > 0 && best[pos - 1] > d2) {
                best[pos] = best[pos - 1];
                --pos;
            }
            best[pos] = d2;
        }
        double sum = 0.0;
        for (std::size_t r = 0; r < kk; ++r) sum += std::sqrt(best[r]);
        scores[i] = sum / static_cast<double>(kk);
    }
    return scores;
}

} // namespace faery::evo
