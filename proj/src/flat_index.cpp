#include "fsfm/flat_index.hpp"

#include <algorithm>
#include <queue>

#include "fsfm/error.hpp"

namespace fsfm {

namespace {

// True if a ranks ahead of b.
bool ranks_ahead(double sim_a, const std::string& id_a, double sim_b, const std::string& id_b) {
    if (sim_a != sim_b) return sim_a > sim_b;
    return id_a < id_b;
}

}  // namespace

void FlatIndex::upsert(std::string_view id, std::span<const double> embedding) {
    if (embedding.size() != dim_) {
        throw Error(ErrorCode::MalformedRecord, "embedding dimension " + std::to_string(embedding.size()) +
                                                    " != index dimension " + std::to_string(dim_));
    }
    auto [it, inserted] = rows_.try_emplace(std::string(id), ids_.size());
    if (inserted) {
        ids_.emplace_back(id);
        data_.insert(data_.end(), embedding.begin(), embedding.end());
    } else {
        std::copy(embedding.begin(), embedding.end(), data_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
    }
}

bool FlatIndex::erase(std::string_view id) {
    auto it = rows_.find(std::string(id));
    if (it == rows_.end()) return false;
    const std::size_t row = it->second;
    const std::size_t last = ids_.size() - 1;
    rows_.erase(it);
    if (row != last) {
        ids_[row] = std::move(ids_[last]);
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(last * dim_), dim_,
                    data_.begin() + static_cast<std::ptrdiff_t>(row * dim_));
        rows_[ids_[row]] = row;
    }
    ids_.pop_back();
    data_.resize(last * dim_);
    return true;
}

void FlatIndex::clear() {
    ids_.clear();
    data_.clear();
    rows_.clear();
}

std::vector<Hit> FlatIndex::search(std::span<const double> query, std::size_t k) const {
    if (k == 0 || ids_.empty()) return {};
    if (query.size() != dim_) {
        throw Error(ErrorCode::InvalidArgument, "query dimension " + std::to_string(query.size()) +
                                                    " != index dimension " + std::to_string(dim_));
    }

    // Min-heap on rank: the top is the weakest of the current best k.
    using Entry = std::pair<double, std::size_t>;
    auto weaker = [&](const Entry& a, const Entry& b) {
        return ranks_ahead(a.first, ids_[a.second], b.first, ids_[b.second]);
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(weaker)> heap(weaker);

    // Hashed embeddings are sparse; zero terms cannot change the sum, so skip them.
    std::vector<std::pair<std::size_t, double>> terms;
    for (std::size_t d = 0; d < dim_; ++d) {
        if (query[d] != 0.0) terms.emplace_back(d, query[d]);
    }
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        const double* v = data_.data() + row * dim_;
        double sim = 0.0;
        for (const auto& [d, w] : terms) sim += w * v[d];
        if (heap.size() < k) {
            heap.emplace(sim, row);
        } else if (ranks_ahead(sim, ids_[row], heap.top().first, ids_[heap.top().second])) {
            heap.pop();
            heap.emplace(sim, row);
        }
    }

    std::vector<Hit> hits;
    hits.reserve(heap.size());
    while (!heap.empty()) {
        hits.push_back({ids_[heap.top().second], std::clamp(heap.top().first, -1.0, 1.0)});
        heap.pop();
    }
    std::reverse(hits.begin(), hits.end());
    return hits;
}

}  // namespace fsfm
