#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specmap/matrix.hpp"

namespace specmap {

// One emission spectrum: intensity over a strictly increasing wavelength grid.
struct Spectrum {
    std::vector<double> wavelengths;
    std::vector<double> intensities;
};

// N instances sharing one wavelength grid, each carrying a compound label and
// a physical-sample id. Immutable after load; safe to share across threads.
struct SpectralDataset {
    Matrix intensities;                   // N x D
    std::vector<double> wavelengths;      // D
    std::vector<std::string> labels;      // per instance
    std::vector<std::string> sample_ids;  // per instance
    std::vector<std::string> classes;     // sorted unique labels

    std::size_t n_instances() const { return intensities.rows(); }
    std::size_t n_features() const { return intensities.cols(); }
    int class_index(const std::string& label) const;
    Spectrum instance(std::size_t i) const;
    std::vector<std::size_t> instances_of(const std::string& label) const;
};

struct DatasetReport {
    std::size_t n_instances = 0;
    std::size_t n_features = 0;
    std::map<std::string, std::size_t> class_histogram;
    std::map<std::string, std::size_t> sample_histogram;
    double min_intensity = 0.0;
    double max_intensity = 0.0;
    std::size_t negative_count = 0;

    std::string to_json() const;
};

enum class DataFormat { wide_csv, manifest };

// wide_csv: header "sample_id,compound,<w1>,...,<wD>", one instance per row.
// manifest: JSON {"grid": <file>, "instances": [{"file","sample_id","compound"}...]}
// with one wavelength / one intensity per line in the referenced files.
SpectralDataset load_dataset(const std::string& path, DataFormat format,
                             const std::vector<std::string>* class_whitelist = nullptr);

void write_dataset(const SpectralDataset& ds, const std::string& path);

DatasetReport validate_dataset(const SpectralDataset& ds);

struct FoldSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded stratified k-fold partition. Test folds are pairwise disjoint, cover
// every index, and hold each class within +-1 of its global proportion.
std::vector<FoldSplit> stratified_folds(const std::vector<std::string>& labels, int folds,
                                        std::uint64_t seed);
std::vector<FoldSplit> stratified_folds(const SpectralDataset& ds, int folds, std::uint64_t seed);

} // namespace specmap
