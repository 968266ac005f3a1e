#include "bia/combinatorics.hpp"

#include <algorithm>
#include <string>

#include "bia/errors.hpp"

namespace bia {

GroupTable::GroupTable(int K, int G, std::vector<std::vector<int>> groups)
    : K_(K), G_(G), groups_(std::move(groups)) {}

const std::vector<int>& GroupTable::group(int n) const {
    if (n < 1 || n > group_count())
        throw parameter_error("group index " + std::to_string(n) + " out of [1.." +
                              std::to_string(group_count()) + "]");
    return groups_[static_cast<std::size_t>(n - 1)];
}

int GroupTable::group_index(const std::vector<int>& subset) const {
    const auto it = std::lower_bound(groups_.begin(), groups_.end(), subset);
    if (it == groups_.end() || *it != subset) throw parameter_error("subset not present in table");
    return static_cast<int>(it - groups_.begin()) + 1;
}

bool GroupTable::contains(int n, int k) const {
    const auto& g = group(n);
    return std::binary_search(g.begin(), g.end(), k);
}

long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

GroupTable ordered_subsets(int K, int G) {
    if (K < 1 || G < 1 || G > K)
        throw parameter_error("ordered_subsets: need 1 <= G <= K, got K=" + std::to_string(K) +
                              ", G=" + std::to_string(G));
    std::vector<std::vector<int>> groups;
    groups.reserve(static_cast<std::size_t>(binomial(K, G)));
    std::vector<int> current(static_cast<std::size_t>(G));
    for (int i = 0; i < G; ++i) current[static_cast<std::size_t>(i)] = i + 1;
    while (true) {
        groups.push_back(current);
        // next subset in lexicographic order on sorted element lists
        int i = G - 1;
        while (i >= 0 && current[static_cast<std::size_t>(i)] == K - (G - 1 - i)) --i;
        if (i < 0) break;
        ++current[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < G; ++j)
            current[static_cast<std::size_t>(j)] = current[static_cast<std::size_t>(j - 1)] + 1;
    }
    return GroupTable(K, G, std::move(groups));
}

std::vector<int> desired_indices(int k, const GroupTable& table) {
    if (k < 1 || k > table.node_count())
        throw parameter_error("receiver id " + std::to_string(k) + " out of [1.." +
                              std::to_string(table.node_count()) + "]");
    std::vector<int> desired;
    for (int n = 1; n <= table.group_count(); ++n) {
        if (table.contains(n, k)) desired.push_back(n);
    }
    return desired;
}

int member_position(int n, int k, const GroupTable& table) {
    const auto& g = table.group(n);
    const auto it = std::lower_bound(g.begin(), g.end(), k);
    if (it == g.end() || *it != k)
        throw membership_error("receiver " + std::to_string(k) + " is not in group " + std::to_string(n));
    return static_cast<int>(it - g.begin()) + 1;
}

int mod1(long long a, int M) {
    if (M <= 0) throw parameter_error("mod1: modulus must be positive");
    long long r = a % M;
    if (r < 0) r += M;
    return r == 0 ? M : static_cast<int>(r);
}

}  // namespace bia
