#pragma once

#include <vector>

namespace bia {

/// All size-G subsets of [1..K] in the set ordering used throughout the
/// schemes: A < B iff the first differing element of A is smaller. On sorted
/// element lists this coincides with lexicographic order, so group(1) is
/// {1,..,G} and group(N_g) is {K-G+1,..,K}.
class GroupTable {
public:
    GroupTable(int K, int G, std::vector<std::vector<int>> groups);

    int node_count() const { return K_; }
    int group_size() const { return G_; }
    int group_count() const { return static_cast<int>(groups_.size()); }

    /// n is 1-based; elements are 1-based node ids in increasing order.
    const std::vector<int>& group(int n) const;

    /// Inverse lookup: 1-based index of the subset, or throws if absent.
    int group_index(const std::vector<int>& subset) const;

    bool contains(int n, int k) const;

private:
    int K_;
    int G_;
    std::vector<std::vector<int>> groups_;
};

long long binomial(int n, int k);

/// Enumerates binomial(K, G) ordered subsets; index i gives S_i.
GroupTable ordered_subsets(int K, int G);

/// Indices of all messages desired by receiver k: V_k = {n : k in S_n},
/// ascending. |V_k| = binomial(K-1, G-1).
std::vector<int> desired_indices(int k, const GroupTable& table);

/// Position g in [1..G] such that S_n(g) = k. Throws membership_error if k is
/// not a member of S_n.
int member_position(int n, int k, const GroupTable& table);

/// Modular map onto [1..M]: returns a~ with (a - a~) divisible by M, so
/// multiples of M map to M rather than 0.
int mod1(long long a, int M);

}  // namespace bia
