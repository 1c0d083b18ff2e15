#include "tradeclust/profiles.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

namespace tradeclust {

ProfileVector::ProfileVector(std::string investor_id, int t_days)
    : investor_id_(std::move(investor_id)), t_days_(t_days) {
    if (t_days < 1) throw ValidationError("t_days must be >= 1");
    words_.assign((n_bits() + 63) / 64, 0);
}

ProfileVector ProfileVector::from_series(const DailyStateSeries& series,
                                         int t_days) {
    ProfileVector v(series.investor_id, t_days);
    const auto t = static_cast<std::size_t>(t_days);
    for (const auto& [day, state] : series.states) {
        if (day < 0 || day >= t_days) {
            throw ValidationError("state day " + std::to_string(day) +
                                  " outside [0, " + std::to_string(t_days) +
                                  ") for investor " + series.investor_id);
        }
        v.set_bit(static_cast<std::size_t>(static_cast<int>(state)) * t +
                  static_cast<std::size_t>(day));
    }
    return v;
}

void ProfileVector::set_bit(std::size_t pos) {
    if (pos >= n_bits()) throw ValidationError("bit position out of range");
    std::uint64_t& word = words_[pos / 64];
    const std::uint64_t mask = std::uint64_t{1} << (pos % 64);
    if (!(word & mask)) {
        word |= mask;
        ++popcount_;
    }
}

bool ProfileVector::test_bit(std::size_t pos) const {
    if (pos >= n_bits()) throw ValidationError("bit position out of range");
    return (words_[pos / 64] >> (pos % 64)) & 1;
}

namespace {

int intersection_popcount(const std::vector<std::uint64_t>& a,
                          const std::vector<std::uint64_t>& b) {
    int count = 0;
    for (std::size_t w = 0; w < a.size(); ++w) {
        count += std::popcount(a[w] & b[w]);
    }
    return count;
}

}  // namespace

double jaccard(const ProfileVector& a, const ProfileVector& b) {
    if (a.n_bits() != b.n_bits()) {
        throw ValidationError("profile vector length mismatch: " +
                              std::to_string(a.n_bits()) + " vs " +
                              std::to_string(b.n_bits()));
    }
    if (a.popcount() == 0 && b.popcount() == 0) {
        throw ValidationError("Jaccard undefined for two empty profiles");
    }
    const int inter = intersection_popcount(a.words(), b.words());
    const int uni = a.popcount() + b.popcount() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double dissimilarity(double j) {
    if (!(j >= 0.0) || !(j <= 1.0)) {
        throw ValidationError("Jaccard coefficient outside [0, 1]");
    }
    return std::sqrt(2.0 * (1.0 - j));
}

DissimilarityMatrix::DissimilarityMatrix(std::vector<std::string> ids,
                                         std::vector<double> lower_triangle)
    : ids_(std::move(ids)), values_(std::move(lower_triangle)) {
    if (ids_.size() < 2) throw ValidationError("matrix needs >= 2 elements");
    if (values_.size() != tri_size(ids_.size())) {
        throw ValidationError("lower triangle size does not match id count");
    }
    for (double d : values_) {
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw ValidationError("dissimilarity values must be finite and >= 0");
        }
    }
}

DissimilarityMatrix dissimilarity_matrix(
    const std::vector<ProfileVector>& vectors, int n_threads) {
    const std::size_t n = vectors.size();
    if (n < 2) throw ValidationError("need >= 2 profile vectors");
    if (n_threads < 1) throw ValidationError("n_threads must be >= 1");
    for (std::size_t i = 1; i < n; ++i) {
        if (vectors[i].n_bits() != vectors[0].n_bits()) {
            throw ValidationError("profile vector length mismatch at " +
                                  vectors[i].investor_id());
        }
    }
    for (const auto& v : vectors) {
        if (v.popcount() == 0) {
            throw ValidationError("empty profile vector for investor " +
                                  v.investor_id());
        }
    }

    std::vector<double> values(tri_size(n));
    // Dynamic row scheduling; every (i, j) cell is written exactly once, so
    // the result does not depend on the worker count.
    std::atomic<std::size_t> next_row{1};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next_row.fetch_add(1);
            if (i >= n) break;
            const auto& vi = vectors[i];
            double* row = values.data() + tri_index(i, 0);
            for (std::size_t j = 0; j < i; ++j) {
                const auto& vj = vectors[j];
                const int inter =
                    intersection_popcount(vi.words(), vj.words());
                const int uni = vi.popcount() + vj.popcount() - inter;
                const double jac =
                    static_cast<double>(inter) / static_cast<double>(uni);
                row[j] = std::sqrt(2.0 * (1.0 - jac));
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<std::string> ids;
    ids.reserve(n);
    for (const auto& v : vectors) ids.push_back(v.investor_id());
    return DissimilarityMatrix(std::move(ids), std::move(values));
}

namespace {
constexpr char kMatrixMagic[8] = {'T', 'C', 'D', 'M', '0', '0', '0', '1'};
}

void DissimilarityMatrix::save_binary(const std::string& path) const {
    std::ostringstream out(std::ios::binary);
    out.write(kMatrixMagic, sizeof(kMatrixMagic));
    const std::uint64_t n = ids_.size();
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    for (const auto& id : ids_) {
        const std::uint32_t len = static_cast<std::uint32_t>(id.size());
        out.write(reinterpret_cast<const char*>(&len), sizeof(len));
        out.write(id.data(), len);
    }
    out.write(reinterpret_cast<const char*>(values_.data()),
              static_cast<std::streamsize>(values_.size() * sizeof(double)));
    write_file_atomic(path, out.str());
}

DissimilarityMatrix DissimilarityMatrix::load_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open matrix file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMatrixMagic, sizeof(magic)) != 0) {
        throw DataError("bad matrix file magic: " + path);
    }
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!in || n < 2) throw DataError("bad matrix header: " + path);
    std::vector<std::string> ids(n);
    for (auto& id : ids) {
        std::uint32_t len = 0;
        in.read(reinterpret_cast<char*>(&len), sizeof(len));
        if (!in) throw DataError("truncated matrix id table: " + path);
        id.resize(len);
        in.read(id.data(), len);
    }
    std::vector<double> values(tri_size(n));
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw DataError("truncated matrix payload: " + path);
    return DissimilarityMatrix(std::move(ids), std::move(values));
}

void DissimilarityMatrix::save_csv(const std::string& path) const {
    std::ostringstream out;
    out << "id_i,id_j,dissimilarity\n";
    for (std::size_t i = 1; i < ids_.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            out << ids_[i] << ',' << ids_[j] << ','
                << format_double(values_[tri_index(i, j)]) << '\n';
        }
    }
    write_file_atomic(path, out.str());
}

}  // namespace tradeclust
