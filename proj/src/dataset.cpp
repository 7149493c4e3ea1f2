#include "specmap/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specmap/csv.hpp"
#include "specmap/error.hpp"
#include "specmap/rng.hpp"

namespace specmap {

namespace {

std::vector<std::string> sorted_unique(const std::vector<std::string>& v) {
    std::set<std::string> s(v.begin(), v.end());
    return {s.begin(), s.end()};
}

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) throw Error("wavelength grid is empty");
    for (std::size_t j = 1; j < grid.size(); ++j)
        if (!(grid[j] > grid[j - 1]))
            throw Error("wavelength grid not strictly increasing at column " + std::to_string(j + 1));
    std::set<double> uniq(grid.begin(), grid.end());
    if (uniq.size() != grid.size()) throw Error("duplicate wavelength columns");
}

void check_whitelist(const std::string& label, const std::vector<std::string>* whitelist,
                     std::size_t row) {
    if (!whitelist) return;
    if (std::find(whitelist->begin(), whitelist->end(), label) == whitelist->end())
        throw Error("unknown class '" + label + "' at row " + std::to_string(row));
}

SpectralDataset finalize(Matrix intensities, std::vector<double> grid,
                         std::vector<std::string> labels, std::vector<std::string> sample_ids) {
    if (intensities.rows() == 0) throw Error("dataset has no instances");
    SpectralDataset ds;
    ds.classes = sorted_unique(labels);
    ds.intensities = std::move(intensities);
    ds.wavelengths = std::move(grid);
    ds.labels = std::move(labels);
    ds.sample_ids = std::move(sample_ids);
    return ds;
}

SpectralDataset load_wide_csv(const std::string& path, const std::vector<std::string>* whitelist) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error("empty dataset file: " + path);
    auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "sample_id" || header[1] != "compound")
        throw Error("header must start with 'sample_id,compound' followed by wavelength columns");
    if (header.back().empty()) throw Error("missing wavelength column name in header");

    std::vector<double> grid;
    grid.reserve(header.size() - 2);
    for (std::size_t j = 2; j < header.size(); ++j)
        grid.push_back(parse_double(header[j], "header wavelength column " + std::to_string(j + 1)));
    check_grid(grid);

    const std::size_t d = grid.size();
    std::vector<double> values;
    std::vector<std::string> labels, sample_ids;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto cells = split_csv_line(line);
        if (cells.size() != d + 2)
            throw Error("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                        " fields, expected " + std::to_string(d + 2));
        sample_ids.emplace_back(cells[0]);
        labels.emplace_back(cells[1]);
        check_whitelist(labels.back(), whitelist, row);
        for (std::size_t j = 0; j < d; ++j)
            values.push_back(parse_double(cells[j + 2], "row " + std::to_string(row)));
    }

    Matrix m(labels.size(), d);
    std::copy(values.begin(), values.end(), m.data());
    return finalize(std::move(m), std::move(grid), std::move(labels), std::move(sample_ids));
}

std::vector<double> load_column_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + what + " file: " + path);
    std::vector<double> out;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        out.push_back(parse_double(line, what + " line " + std::to_string(row)));
    }
    return out;
}

SpectralDataset load_manifest(const std::string& path, const std::vector<std::string>* whitelist) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error(std::string("invalid manifest JSON: ") + e.what());
    }
    if (!j.contains("grid") || !j.contains("instances"))
        throw Error("manifest must declare 'grid' and 'instances'");

    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](const std::string& p) { return (base / p).string(); };

    auto grid = load_column_file(resolve(j.at("grid").get<std::string>()), "grid");
    check_grid(grid);

    std::vector<double> values;
    std::vector<std::string> labels, sample_ids;
    std::size_t row = 0;
    for (const auto& inst : j.at("instances")) {
        ++row;
        sample_ids.push_back(inst.at("sample_id").get<std::string>());
        labels.push_back(inst.at("compound").get<std::string>());
        check_whitelist(labels.back(), whitelist, row);
        auto intensities = load_column_file(resolve(inst.at("file").get<std::string>()), "instance");
        if (intensities.size() != grid.size())
            throw Error("instance " + std::to_string(row) + " has " +
                        std::to_string(intensities.size()) + " intensities, grid has " +
                        std::to_string(grid.size()));
        values.insert(values.end(), intensities.begin(), intensities.end());
    }

    Matrix m(labels.size(), grid.size());
    std::copy(values.begin(), values.end(), m.data());
    return finalize(std::move(m), std::move(grid), std::move(labels), std::move(sample_ids));
}

} // namespace

int SpectralDataset::class_index(const std::string& label) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) return -1;
    return static_cast<int>(it - classes.begin());
}

Spectrum SpectralDataset::instance(std::size_t i) const {
    Spectrum s;
    s.wavelengths = wavelengths;
    auto row = intensities.row(i);
    s.intensities.assign(row.begin(), row.end());
    return s;
}

std::vector<std::size_t> SpectralDataset::instances_of(const std::string& label) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) out.push_back(i);
    return out;
}

SpectralDataset load_dataset(const std::string& path, DataFormat format,
                             const std::vector<std::string>* class_whitelist) {
    return format == DataFormat::wide_csv ? load_wide_csv(path, class_whitelist)
                                          : load_manifest(path, class_whitelist);
}

void write_dataset(const SpectralDataset& ds, const std::string& path) {
    auto out = open_output(path);
    out << "sample_id,compound";
    for (double w : ds.wavelengths) out << ',' << format_double(w);
    out << '\n';
    for (std::size_t i = 0; i < ds.n_instances(); ++i) {
        out << ds.sample_ids[i] << ',' << ds.labels[i];
        for (double v : ds.intensities.row(i)) out << ',' << format_double(v);
        out << '\n';
    }
}

DatasetReport validate_dataset(const SpectralDataset& ds) {
    DatasetReport r;
    r.n_instances = ds.n_instances();
    r.n_features = ds.n_features();
    for (const auto& l : ds.labels) ++r.class_histogram[l];
    for (const auto& s : ds.sample_ids) ++r.sample_histogram[s];
    bool first = true;
    for (std::size_t i = 0; i < ds.n_instances(); ++i) {
        for (double v : ds.intensities.row(i)) {
            if (first) {
                r.min_intensity = r.max_intensity = v;
                first = false;
            } else {
                r.min_intensity = std::min(r.min_intensity, v);
                r.max_intensity = std::max(r.max_intensity, v);
            }
            if (v < 0.0) ++r.negative_count;
        }
    }
    return r;
}

std::string DatasetReport::to_json() const {
    nlohmann::json j;
    j["n_instances"] = n_instances;
    j["n_features"] = n_features;
    j["class_histogram"] = class_histogram;
    j["sample_histogram"] = sample_histogram;
    j["min_intensity"] = min_intensity;
    j["max_intensity"] = max_intensity;
    j["negative_count"] = negative_count;
    return j.dump(2) + "\n";
}

std::vector<FoldSplit> stratified_folds(const std::vector<std::string>& labels, int folds,
                                        std::uint64_t seed) {
    if (folds < 2) throw Error("folds must be >= 2");
    const std::size_t n = labels.size();

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    for (const auto& [cls, members] : by_class)
        if (members.size() < static_cast<std::size_t>(folds))
            throw Error("class '" + cls + "' has " + std::to_string(members.size()) +
                        " members, fewer than " + std::to_string(folds) + " folds");

    // Shuffle within each class, then deal round-robin. Each class starts
    // dealing where the previous one left off, so the per-class remainders
    // telescope and global fold sizes also stay within +-1.
    std::vector<std::vector<std::size_t>> test_sets(folds);
    Rng rng(derive_seed(seed, "stratified_folds"));
    std::size_t start_fold = 0;
    for (auto& [cls, members] : by_class) {
        (void)cls;
        rng.shuffle(members);
        for (std::size_t t = 0; t < members.size(); ++t)
            test_sets[(start_fold + t) % folds].push_back(members[t]);
        start_fold = (start_fold + members.size()) % folds;
    }

    std::vector<FoldSplit> out(folds);
    std::vector<int> fold_of(n);
    for (int f = 0; f < folds; ++f) {
        std::sort(test_sets[f].begin(), test_sets[f].end());
        for (auto i : test_sets[f]) fold_of[i] = f;
        out[f].test = std::move(test_sets[f]);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (int f = 0; f < folds; ++f)
            if (fold_of[i] != f) out[f].train.push_back(i);
    return out;
}

std::vector<FoldSplit> stratified_folds(const SpectralDataset& ds, int folds, std::uint64_t seed) {
    return stratified_folds(ds.labels, folds, seed);
}

} // namespace specmap
