#include "specmap/spectral_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "specmap/error.hpp"
#include "specmap/kernels.hpp"

namespace specmap {

RegionPartition partition_regions(const std::vector<double>& grid, int n_regions) {
    const std::size_t d = grid.size();
    if (n_regions < 1) throw Error("n_regions must be >= 1");
    if (static_cast<std::size_t>(n_regions) > d)
        throw Error("n_regions (" + std::to_string(n_regions) + ") exceeds grid length (" +
                    std::to_string(d) + ")");

    RegionPartition part;
    part.n_regions = n_regions;
    const std::size_t base = d / n_regions;
    const std::size_t rem = d % n_regions;
    std::size_t begin = 0;
    for (int r = 0; r < n_regions; ++r) {
        // remainder goes to the last regions, one extra index each
        const std::size_t size = base + (static_cast<std::size_t>(r) >= n_regions - rem ? 1 : 0);
        const std::size_t end = begin + size;
        part.index_ranges.emplace_back(begin, end);
        part.boundaries.emplace_back(grid[begin], grid[end - 1]);
        begin = end;
    }
    return part;
}

Matrix region_totals(const SpectralDataset& ds, const RegionPartition& part) {
    if (part.index_ranges.empty() || part.index_ranges.back().second != ds.n_features())
        throw Error("region partition does not cover the dataset grid");
    return kernels::region_totals(ds.intensities, part.index_ranges);
}

RegionStats expected_intensity(const std::vector<double>& totals, int n_bins) {
    if (totals.empty()) throw Error("expected_intensity needs at least one total");
    if (n_bins < 1) throw Error("n_bins must be >= 1");

    const auto [lo_it, hi_it] = std::minmax_element(totals.begin(), totals.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double width = (hi - lo) / n_bins;

    RegionStats rs;
    rs.counts.assign(n_bins, 0);
    rs.bin_edges.resize(n_bins + 1);
    for (int b = 0; b <= n_bins; ++b) rs.bin_edges[b] = lo + width * b;
    rs.bin_edges[n_bins] = hi;

    for (double t : totals) {
        std::size_t idx;
        if (width > 0.0) {
            idx = std::min(static_cast<std::size_t>((t - lo) / width),
                           static_cast<std::size_t>(n_bins - 1));
        } else {
            idx = 0; // all totals equal: one occupied bin
        }
        ++rs.counts[idx];
    }

    double ei = 0.0;
    const double inv_n = 1.0 / static_cast<double>(totals.size());
    for (int b = 0; b < n_bins; ++b)
        ei += static_cast<double>(rs.counts[b]) * inv_n * (lo + width * (b + 0.5));
    rs.expected_intensity = ei;

    double sum = 0.0;
    for (double t : totals) sum += t;
    rs.raw_mean = sum * inv_n;
    return rs;
}

namespace {

constexpr double kLog2 = 0.69314718055994530941723212145818;

inline double plogp_bits(double p) {
    return p > 0.0 ? -p * (std::log(p) / kLog2) : 0.0;
}

} // namespace

EntropyProfile entropy_density(const SpectralDataset& ds, const std::string& compound,
                               double log_floor) {
    const auto idx = ds.instances_of(compound);
    if (idx.empty()) throw Error("compound '" + compound + "' has no instances");

    const std::size_t d = ds.n_features();
    std::vector<double> totals(idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t) {
        double sum = 0.0;
        for (double v : ds.intensities.row(idx[t]))
            sum += std::max(v, 0.0);
        if (!(sum > 0.0))
            throw Error("instance " + std::to_string(idx[t]) +
                        " has non-positive total intensity after clamping");
        totals[t] = sum;
    }

    EntropyProfile prof;
    prof.compound = compound;
    prof.n_instances = idx.size();
    prof.log_floor = log_floor;
    prof.h.assign(d, 0.0);
    prof.log10_h.assign(d, 0.0);

    const double inv_n = 1.0 / static_cast<double>(idx.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(d); ++j) {
        double acc = 0.0;
        for (std::size_t t = 0; t < idx.size(); ++t) {
            const double v = std::max(ds.intensities(idx[t], j), 0.0);
            acc += plogp_bits(v / totals[t]);
        }
        const double h = acc * inv_n;
        prof.h[j] = h;
        prof.log10_h[j] = h > 0.0 ? std::log10(h) : log_floor;
    }
    return prof;
}

double shannon_entropy(std::span<const double> p) {
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw Error("probability vector has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw Error("probability vector sums to " + std::to_string(sum) + ", not 1");
    double h = 0.0;
    for (double v : p) h += plogp_bits(v);
    return h;
}

namespace {

struct Peak {
    std::size_t index;
    double prominence;
};

// Prominence of the local maximum at i: height above the higher of the two
// valley floors separating it from the nearest greater value on each side.
double peak_prominence(const std::vector<double>& y, std::size_t i) {
    const double h = y[i];
    double left_min = h;
    for (std::size_t t = i; t-- > 0;) {
        if (y[t] > h) break;
        left_min = std::min(left_min, y[t]);
    }
    double right_min = h;
    for (std::size_t t = i + 1; t < y.size(); ++t) {
        if (y[t] > h) break;
        right_min = std::min(right_min, y[t]);
    }
    return h - std::max(left_min, right_min);
}

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double m = v[n / 2];
    if (n % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
        m = 0.5 * (m + v[n / 2 - 1]);
    }
    return m;
}

} // namespace

std::vector<LineMatch> match_emission_lines(const Spectrum& s, const std::vector<ReferenceLine>& refs,
                                            double tolerance_nm, double prominence_threshold) {
    if (!(tolerance_nm > 0.0)) throw Error("tolerance must be positive");
    if (s.wavelengths.size() != s.intensities.size())
        throw Error("spectrum has " + std::to_string(s.wavelengths.size()) +
                    " wavelengths but " + std::to_string(s.intensities.size()) + " intensities");
    const auto& y = s.intensities;

    if (prominence_threshold < 0.0) {
        const double med = median(y);
        std::vector<double> dev(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) dev[i] = std::abs(y[i] - med);
        prominence_threshold = 5.0 * median(dev);
    }

    std::vector<Peak> peaks;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (y[i] > y[i - 1] && y[i] > y[i + 1]) {
            const double prom = peak_prominence(y, i);
            if (prom > prominence_threshold) peaks.push_back({i, prom});
        }
    }

    std::vector<LineMatch> out;
    out.reserve(refs.size());
    for (const auto& ref : refs) {
        LineMatch m;
        m.ref = ref;
        m.tolerance_nm = tolerance_nm;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : peaks) {
            const double dist = std::abs(s.wavelengths[p.index] - ref.wavelength_nm);
            if (dist <= tolerance_nm && dist < best) { // ties keep the earlier peak
                best = dist;
                m.matched = true;
                m.lambda_obs = s.wavelengths[p.index];
                m.intensity = y[p.index];
                m.prominence = p.prominence;
            }
        }
        out.push_back(m);
    }
    return out;
}

std::vector<ReferenceLine> builtin_reference_lines() {
    return {
        {"Cu I", 324.754}, {"Cu I", 327.396}, {"Cu I", 521.820},
        {"Zn I", 334.501}, {"Zn I", 330.258}, {"Zn I", 481.053},
    };
}

} // namespace specmap
