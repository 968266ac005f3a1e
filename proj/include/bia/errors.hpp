#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bia {

/// Invalid argument to a scheme/construction routine (bad K, G, M, shapes, ...).
class parameter_error : public std::invalid_argument {
public:
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Receiver/message membership violated (e.g. k not in the group of message n).
class membership_error : public std::domain_error {
public:
    explicit membership_error(const std::string& what) : std::domain_error(what) {}
};

/// Construction refused because the scheme duration exceeds the desk-scale cap.
class size_error : public std::length_error {
public:
    explicit size_error(const std::string& what) : std::length_error(what) {}
};

/// A decoder could not be built because the mode-selection matrices do not
/// satisfy the required rank conditions. Carries the offending ranks.
class alignment_error : public std::runtime_error {
public:
    alignment_error(const std::string& what, std::vector<long long> ranks, long long union_rank,
                    long long expected_total)
        : std::runtime_error(what),
          family_ranks(std::move(ranks)),
          union_rank(union_rank),
          expected_total(expected_total) {}

    explicit alignment_error(const std::string& what)
        : std::runtime_error(what), union_rank(-1), expected_total(-1) {}

    std::vector<long long> family_ranks;  // per-family-member numeric rank
    long long union_rank;                 // rank of the stacked family, -1 if unknown
    long long expected_total;             // rank demanded by the scheme, -1 if unknown
};

/// A transmit symbol would depend on a message its transmitter does not know.
class encoding_error : public std::logic_error {
public:
    explicit encoding_error(const std::string& what) : std::logic_error(what) {}
};

/// Recovery failed (missing side information, residual above tolerance, ...).
class decoding_error : public std::runtime_error {
public:
    explicit decoding_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bia
