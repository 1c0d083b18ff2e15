#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tradeclust/encoder.hpp"

namespace tradeclust {

// Bit-packed trading-profile vector of length 3 * t_days:
// bit d flags a Buy on day d, bit t_days + d a Sell, bit 2*t_days + d a
// BuySell. Exactly one of the three slots of a day is set when the investor
// traded that day.
class ProfileVector {
public:
    ProfileVector(std::string investor_id, int t_days);

    static ProfileVector from_series(const DailyStateSeries& series,
                                     int t_days);

    void set_bit(std::size_t pos);
    bool test_bit(std::size_t pos) const;

    const std::string& investor_id() const { return investor_id_; }
    int t_days() const { return t_days_; }
    std::size_t n_bits() const { return 3 * static_cast<std::size_t>(t_days_); }
    int popcount() const { return popcount_; }
    const std::vector<std::uint64_t>& words() const { return words_; }

private:
    std::string investor_id_;
    int t_days_;
    int popcount_ = 0;
    std::vector<std::uint64_t> words_;
};

// J = |a AND b| / |a OR b| via word-wise population counts. Both vectors must
// be nonzero and of equal length.
double jaccard(const ProfileVector& a, const ProfileVector& b);

// d = sqrt(2 * (1 - j)), the dissimilarity induced by the Jaccard
// coefficient; 0 for identical profiles, sqrt(2) for disjoint ones.
double dissimilarity(double j);

// Symmetric N x N dissimilarity matrix stored as a packed lower triangle.
class DissimilarityMatrix {
public:
    DissimilarityMatrix(std::vector<std::string> ids,
                        std::vector<double> lower_triangle);

    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<double>& lower_triangle() const { return values_; }

    double at(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        return i > j ? values_[tri_index(i, j)] : values_[tri_index(j, i)];
    }

    // Binary triangular format (magic, N, id table, row-major lower triangle
    // of 64-bit floats). Bit-exact across runs on the same input.
    void save_binary(const std::string& path) const;
    static DissimilarityMatrix load_binary(const std::string& path);

    // Debug format: header row, then one "id_i,id_j,d" row per pair.
    void save_csv(const std::string& path) const;

private:
    std::vector<std::string> ids_;
    std::vector<double> values_;
};

// Computes all N(N-1)/2 pairwise dissimilarities. Pairs are independent, so
// the rows are sharded across `n_threads` workers; the result is identical
// for any worker count. Requires >= 2 vectors of equal length, all nonzero.
DissimilarityMatrix dissimilarity_matrix(
    const std::vector<ProfileVector>& vectors, int n_threads = 1);

}  // namespace tradeclust
