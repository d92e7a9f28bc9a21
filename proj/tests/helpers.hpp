#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

#include <Eigen/Dense>

#include "ggrf/data_model.hpp"

namespace testing {

inline std::vector<std::string> ids(const std::string& prefix, Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

inline ggrf::GenotypeMatrix make_genotypes(const Eigen::MatrixXd& d) {
    return ggrf::GenotypeMatrix(d, ids("S", d.rows()), ids("V", d.cols()));
}

/// Random 0/1/2 dosages with per-column allele frequency in [0.05, 0.5].
inline Eigen::MatrixXd random_dosages(Eigen::Index n, Eigen::Index k, std::mt19937_64& rng) {
    Eigen::MatrixXd d(n, k);
    std::uniform_real_distribution<double> freq(0.05, 0.5);
    for (Eigen::Index c = 0; c < k; ++c) {
        std::binomial_distribution<int> draw(2, freq(rng));
        for (Eigen::Index r = 0; r < n; ++r) d(r, c) = draw(rng);
        if (d.col(c).maxCoeff() == 0.0) d(0, c) = 1.0;
    }
    return d;
}

inline Eigen::VectorXd normal_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = z(rng);
    return v;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("ggrf_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path) << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testing
