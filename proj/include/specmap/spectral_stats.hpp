#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specmap/dataset.hpp"
#include "specmap/matrix.hpp"

namespace specmap {

// Contiguous partition of the wavelength grid into n_regions index ranges
// whose sizes differ by at most one.
struct RegionPartition {
    int n_regions = 0;
    std::vector<std::pair<double, double>> boundaries;              // (lambda_low, lambda_high) nm
    std::vector<std::pair<std::size_t, std::size_t>> index_ranges;  // [begin, end)
};

RegionPartition partition_regions(const std::vector<double>& grid, int n_regions);

// totals(i, r) = sum of instance i's intensities over region r. Negative
// intensities are kept as-is.
Matrix region_totals(const SpectralDataset& ds, const RegionPartition& part);

// Equal-width histogram of per-instance totals plus its expectation taken
// over bin midpoints. raw_mean is the plain sample mean, emitted alongside
// for comparison.
struct RegionStats {
    std::vector<double> bin_edges;   // n_bins + 1
    std::vector<std::size_t> counts; // n_bins
    double expected_intensity = 0.0;
    double raw_mean = 0.0;
};

RegionStats expected_intensity(const std::vector<double>& totals, int n_bins);

// Per-wavelength Shannon-entropy contribution -p log2 p of each clamp-
// normalized spectrum, averaged over a compound's instances. Summing h over
// wavelengths recovers the mean Shannon entropy exactly.
struct EntropyProfile {
    std::string compound;
    std::vector<double> h;        // length D, >= 0
    std::vector<double> log10_h;  // log10(h); exact zeros emit log_floor
    std::size_t n_instances = 0;
    double log_floor = -12.0;
};

EntropyProfile entropy_density(const SpectralDataset& ds, const std::string& compound,
                               double log_floor = -12.0);

// H(p) in bits. p must be entrywise non-negative and sum to 1 within 1e-9.
double shannon_entropy(std::span<const double> p);

struct ReferenceLine {
    std::string species;
    double wavelength_nm = 0.0;
};

struct LineMatch {
    ReferenceLine ref;
    bool matched = false;
    double lambda_obs = 0.0;
    double intensity = 0.0;
    double prominence = 0.0;
    double tolerance_nm = 0.0;
};

// Peak detection (local maxima above a prominence threshold) followed by
// nearest-peak matching within tolerance. A negative threshold selects the
// default of 5x the spectrum's median absolute deviation.
std::vector<LineMatch> match_emission_lines(const Spectrum& s, const std::vector<ReferenceLine>& refs,
                                            double tolerance_nm, double prominence_threshold = -1.0);

// The six Cu I / Zn I lines of brass micro-well material.
std::vector<ReferenceLine> builtin_reference_lines();

} // namespace specmap
