#include "tradeclust/partition.hpp"

namespace tradeclust {

void Partition::compact() {
    std::unordered_map<int, int> remap;
    remap.reserve(labels.size());
    for (int& label : labels) {
        auto [it, inserted] =
            remap.emplace(label, static_cast<int>(remap.size()));
        label = it->second;
    }
    n_clusters = static_cast<int>(remap.size());
}

std::unordered_map<std::string, int> Partition::label_by_id() const {
    std::unordered_map<std::string, int> out;
    out.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], labels[i]);
    return out;
}

void Partition::validate() const {
    if (ids.size() != labels.size()) {
        throw ValidationError("partition ids/labels size mismatch");
    }
    std::vector<bool> seen(static_cast<std::size_t>(n_clusters), false);
    for (int label : labels) {
        if (label < 0 || label >= n_clusters) {
            throw ValidationError("partition label out of range");
        }
        seen[static_cast<std::size_t>(label)] = true;
    }
    for (bool s : seen) {
        if (!s) throw ValidationError("partition has an empty cluster id");
    }
}

}  // namespace tradeclust
