#include "specmap/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "specmap/csv.hpp"
#include "specmap/error.hpp"
#include "specmap/rng.hpp"
#include "specmap/spectral_stats.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace specmap {

namespace {

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

const std::map<std::string, std::string> kReportFile = {
    {"table1", "table1_expected_intensity.csv"},
    {"table2", "table2_explained_variance.csv"},
    {"table3", "table3_dbi_summary.csv"},
    {"table4", "table4_accuracy_summary.csv"},
    {"scree", "scree_residual_variance.csv"},
    {"dbi", "dbi_sweep.csv"},
    {"errorbar", "accuracy_errorbars.csv"},
    {"entropy", "entropy_profiles.csv"},
};

const std::map<std::string, std::string> kReportStage = {
    {"table1", "regions"}, {"table2", "embed"},    {"table3", "cluster"},
    {"table4", "classify"}, {"scree", "sweep"},     {"dbi", "cluster"},
    {"errorbar", "classify"}, {"entropy", "entropy"},
};

std::string stage_state_rel(const std::string& stage) { return "stages/" + stage + ".json"; }

json load_state(const std::string& run_dir, const std::string& stage) {
    const fs::path path = fs::path(run_dir) / stage_state_rel(stage);
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("stage '" + stage + "' has no state under " + run_dir +
                    "; run that stage first");
    json j;
    in >> j;
    return j;
}

bool has_state(const std::string& run_dir, const std::string& stage) {
    return fs::exists(fs::path(run_dir) / stage_state_rel(stage));
}

std::string format_format(DataFormat f) {
    return f == DataFormat::wide_csv ? "wide_csv" : "manifest";
}

DataFormat parse_format(const std::string& s) {
    if (s == "wide_csv") return DataFormat::wide_csv;
    if (s == "manifest") return DataFormat::manifest;
    throw Error("unknown dataset format '" + s + "' (expected wide_csv or manifest)");
}

template <typename T>
void read_key(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error("config must be a JSON object");

    static const std::vector<std::string> known = {
        "input",        "format",        "out",           "seed",
        "regions",      "bins",          "methods",       "neighborhoods",
        "dims",         "degrees",       "folds",         "cluster_counts",
        "cluster_dims", "svm_c",         "standardize",   "inhomogeneous",
        "baseline_raw", "svm_tol",       "svm_max_iterations", "kmeans_restarts",
        "lle_reg_scale", "entropy_log_floor", "line_tolerance_nm"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw Error("unknown config key '" + it.key() + "'");
    }

    RunConfig cfg;
    read_key(j, "input", cfg.input);
    if (j.contains("format")) cfg.format = parse_format(j.at("format").get<std::string>());
    read_key(j, "out", cfg.out_dir);
    read_key(j, "seed", cfg.seed);
    read_key(j, "regions", cfg.regions);
    read_key(j, "bins", cfg.bins);
    read_key(j, "methods", cfg.methods);
    read_key(j, "neighborhoods", cfg.neighborhoods);
    read_key(j, "dims", cfg.dims);
    read_key(j, "degrees", cfg.degrees);
    read_key(j, "folds", cfg.folds);
    read_key(j, "cluster_counts", cfg.cluster_counts);
    read_key(j, "cluster_dims", cfg.cluster_dims);
    read_key(j, "svm_c", cfg.svm_c);
    read_key(j, "standardize", cfg.standardize);
    read_key(j, "inhomogeneous", cfg.inhomogeneous);
    read_key(j, "baseline_raw", cfg.baseline_raw);
    read_key(j, "svm_tol", cfg.svm_tol);
    read_key(j, "svm_max_iterations", cfg.svm_max_iterations);
    read_key(j, "kmeans_restarts", cfg.kmeans_restarts);
    read_key(j, "lle_reg_scale", cfg.lle_reg_scale);
    read_key(j, "entropy_log_floor", cfg.entropy_log_floor);
    read_key(j, "line_tolerance_nm", cfg.line_tolerance_nm);
    cfg.validate();
    return cfg;
}

std::string RunConfig::to_json() const {
    json j;
    j["input"] = input;
    j["format"] = format_format(format);
    j["out"] = out_dir;
    j["seed"] = seed;
    j["regions"] = regions;
    j["bins"] = bins;
    j["methods"] = methods;
    j["neighborhoods"] = neighborhoods;
    j["dims"] = dims;
    j["degrees"] = degrees;
    j["folds"] = folds;
    j["cluster_counts"] = cluster_counts;
    j["cluster_dims"] = cluster_dims;
    j["svm_c"] = svm_c;
    j["standardize"] = standardize;
    j["inhomogeneous"] = inhomogeneous;
    j["baseline_raw"] = baseline_raw;
    j["svm_tol"] = svm_tol;
    j["svm_max_iterations"] = svm_max_iterations;
    j["kmeans_restarts"] = kmeans_restarts;
    j["lle_reg_scale"] = lle_reg_scale;
    j["entropy_log_floor"] = entropy_log_floor;
    j["line_tolerance_nm"] = line_tolerance_nm;
    return j.dump(2) + "\n";
}

void RunConfig::validate() const {
    auto require = [](bool cond, const std::string& what) {
        if (!cond) throw Error("invalid config: " + what);
    };
    require(!methods.empty(), "methods list is empty");
    for (const auto& m : methods)
        require(m == "pca" || m == "cmds" || m == "isomap" || m == "lle",
                "unknown method '" + m + "'");
    require(!neighborhoods.empty(), "neighborhoods list is empty");
    require(!dims.empty(), "dims list is empty");
    require(!degrees.empty(), "degrees list is empty");
    require(!cluster_counts.empty(), "cluster_counts list is empty");
    require(!cluster_dims.empty(), "cluster_dims list is empty");
    for (int d : dims) require(d >= 1, "dims entries must be >= 1");
    for (int d : cluster_dims) require(d >= 1, "cluster_dims entries must be >= 1");
    for (int k : degrees) require(k >= 1, "degrees entries must be >= 1");
    for (int c : cluster_counts) require(c >= 2, "cluster_counts entries must be >= 2");
    require(regions >= 1, "regions must be >= 1");
    require(bins >= 1, "bins must be >= 1");
    require(folds >= 2, "folds must be >= 2");
    require(kmeans_restarts >= 1, "kmeans_restarts must be >= 1");
    require(svm_c > 0.0, "svm_c must be positive");
    require(svm_tol > 0.0, "svm_tol must be positive");
    require(lle_reg_scale >= 0.0, "lle_reg_scale must be non-negative");
    require(line_tolerance_nm > 0.0, "line_tolerance_nm must be positive");
}

std::string RunManifest::to_json() const {
    json j;
    j["config"] = json::parse(config_json);
    j["seed"] = seed;
    json jf = json::object();
    for (const auto& [rel, hash] : files) jf[rel] = hash;
    j["files"] = jf;
    json js = json::array();
    for (const auto& s : stages) {
        json e;
        e["name"] = s.name;
        e["status"] = s.status;
        e["seconds"] = s.seconds;
        if (!s.error.empty()) e["error"] = s.error;
        js.push_back(e);
    }
    j["stages"] = js;
    return j.dump(2) + "\n";
}

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

const SpectralDataset& Pipeline::dataset() const {
    require_dataset();
    return ds_;
}

void Pipeline::require_dataset() const {
    if (!loaded_) throw Error("dataset not loaded; run ingest first");
}

void Pipeline::write_artifact(const std::string& rel, const std::string& content) {
    const fs::path full = fs::path(cfg_.out_dir) / rel;
    fs::create_directories(full.parent_path());
    auto out = open_output(full.string());
    out << content;
    out.close();
    if (!out) throw Error("failed writing " + full.string());
    if (std::find(written_.begin(), written_.end(), rel) == written_.end())
        written_.push_back(rel);
}

std::vector<int> Pipeline::usable_dims(std::size_t cap) const {
    std::vector<int> out;
    for (int d : cfg_.dims)
        if (static_cast<std::size_t>(d) <= cap) out.push_back(d);
    return out;
}

void Pipeline::ingest(bool write_canonical_csv) {
    ds_ = load_dataset(cfg_.input, cfg_.format);
    class_labels_.resize(ds_.n_instances());
    for (std::size_t i = 0; i < ds_.n_instances(); ++i)
        class_labels_[i] = ds_.class_index(ds_.labels[i]);
    loaded_ = true;

    auto report = validate_dataset(ds_);
    json j = json::parse(report.to_json());
    j["seed"] = cfg_.seed;
    write_artifact("dataset_report.json", j.dump(2) + "\n");

    if (write_canonical_csv) {
        const fs::path path = fs::path(cfg_.out_dir) / "dataset.csv";
        fs::create_directories(path.parent_path());
        write_dataset(ds_, path.string());
        if (std::find(written_.begin(), written_.end(), "dataset.csv") == written_.end())
            written_.push_back("dataset.csv");
    }
}

void Pipeline::regions() {
    require_dataset();
    const auto part = partition_regions(ds_.wavelengths, cfg_.regions);
    const Matrix totals = region_totals(ds_, part);

    json rows = json::array();
    for (const auto& compound : ds_.classes) {
        const auto members = ds_.instances_of(compound);
        for (int r = 0; r < part.n_regions; ++r) {
            std::vector<double> vals;
            vals.reserve(members.size());
            for (auto i : members) vals.push_back(totals(i, r));
            const auto stats = expected_intensity(vals, cfg_.bins);
            json row;
            row["compound"] = compound;
            row["region"] = r;
            row["low_nm"] = part.boundaries[r].first;
            row["high_nm"] = part.boundaries[r].second;
            row["expected_intensity"] = stats.expected_intensity;
            row["raw_mean"] = stats.raw_mean;
            rows.push_back(row);
        }
    }
    json state;
    state["seed"] = cfg_.seed;
    state["bins"] = cfg_.bins;
    state["n_regions"] = cfg_.regions;
    state["rows"] = rows;
    write_artifact(stage_state_rel("regions"), state.dump(2) + "\n");
}

void Pipeline::entropy() {
    require_dataset();
    json profiles = json::array();
    for (const auto& compound : ds_.classes) {
        const auto prof = entropy_density(ds_, compound, cfg_.entropy_log_floor);
        json p;
        p["compound"] = compound;
        p["n_instances"] = prof.n_instances;
        p["h"] = prof.h;
        p["log10_h"] = prof.log10_h;
        profiles.push_back(p);
    }
    json state;
    state["seed"] = cfg_.seed;
    state["log_floor"] = cfg_.entropy_log_floor;
    state["wavelengths"] = ds_.wavelengths;
    state["profiles"] = profiles;
    write_artifact(stage_state_rel("entropy"), state.dump(2) + "\n");
}

void Pipeline::lines() {
    require_dataset();
    const auto refs = builtin_reference_lines();
    std::string csv = "# seed=" + std::to_string(cfg_.seed) + "\n";
    csv += "compound,species,ref_nm,matched,obs_nm,intensity,prominence\n";
    for (const auto& compound : ds_.classes) {
        const auto members = ds_.instances_of(compound);
        Spectrum mean;
        mean.wavelengths = ds_.wavelengths;
        mean.intensities.assign(ds_.n_features(), 0.0);
        for (auto i : members) {
            auto row = ds_.intensities.row(i);
            for (std::size_t t = 0; t < row.size(); ++t) mean.intensities[t] += row[t];
        }
        for (auto& v : mean.intensities) v /= static_cast<double>(members.size());

        for (const auto& m : match_emission_lines(mean, refs, cfg_.line_tolerance_nm)) {
            csv += compound + "," + m.ref.species + "," + format_double(m.ref.wavelength_nm) + ",";
            if (m.matched) {
                csv += "true," + format_double(m.lambda_obs) + "," + format_double(m.intensity) +
                       "," + format_double(m.prominence) + "\n";
            } else {
                csv += "false,,,\n";
            }
        }
    }
    write_artifact("lines.csv", csv);
}

namespace {

std::string embedding_csv(const SpectralDataset& ds, const Matrix& coords, std::uint64_t seed) {
    std::string csv = "# seed=" + std::to_string(seed) + "\n";
    csv += "instance,sample_id,compound";
    for (std::size_t c = 0; c < coords.cols(); ++c) csv += ",c" + std::to_string(c + 1);
    csv += "\n";
    for (std::size_t i = 0; i < coords.rows(); ++i) {
        csv += std::to_string(i) + "," + ds.sample_ids[i] + "," + ds.labels[i];
        for (std::size_t c = 0; c < coords.cols(); ++c) csv += "," + format_double(coords(i, c));
        csv += "\n";
    }
    return csv;
}

json embedding_state(const Embedding& emb, const std::vector<int>& dims,
                     const std::vector<double>& residual) {
    json j;
    j["eigenvalues"] = emb.eigenvalues;
    j["explained"] = emb.explained_variance;
    j["clamped"] = emb.clamped_eigenvalues;
    j["residual_dims"] = dims;
    j["residual"] = residual;
    return j;
}

} // namespace

void Pipeline::embed() {
    require_dataset();
    const std::size_t n = ds_.n_instances();
    const int d_cap = static_cast<int>(std::min(n - 1, ds_.n_features()));
    const int d_want = *std::max_element(cfg_.dims.begin(), cfg_.dims.end());
    d_lin_ = std::min(d_want, d_cap);
    if (d_lin_ < 1) throw Error("dataset too small for any embedding dimension");

    pca_ = pca(ds_.intensities, d_lin_);
    const auto dm = euclidean_distances(ds_.intensities);
    cmds_ = cmds(dm, d_lin_);

    const auto dims_avail = usable_dims(static_cast<std::size_t>(d_lin_));
    const auto pca_res = residual_variance(dm, pca_, dims_avail);
    const auto cmds_res = residual_variance(dm, cmds_, dims_avail);

    json state;
    state["seed"] = cfg_.seed;
    state["d"] = d_lin_;
    state["pca"] = embedding_state(pca_, dims_avail, pca_res);
    state["cmds"] = embedding_state(cmds_, dims_avail, cmds_res);
    write_artifact(stage_state_rel("embed"), state.dump(2) + "\n");

    write_artifact("embeddings/pca.csv", embedding_csv(ds_, pca_.coords, cfg_.seed));
    write_artifact("embeddings/cmds.csv", embedding_csv(ds_, cmds_.coords, cfg_.seed));
    have_embed_ = true;
}

void Pipeline::sweep() {
    require_dataset();
    const std::size_t n = ds_.n_instances();
    json cells_json = json::array();

    for (const auto& m : cfg_.methods) {
        if (m != "isomap" && m != "lle") continue;
        const std::size_t cap = m == "lle" ? n - 2 : n - 1;
        const auto dims_avail = usable_dims(cap);
        if (dims_avail.empty()) continue;
        auto cells = neighborhood_sweep(ds_.intensities, method_from_name(m), cfg_.neighborhoods,
                                        dims_avail, cfg_.lle_reg_scale);
        for (const auto& cell : cells) {
            json c;
            c["method"] = m;
            c["k"] = cell.k;
            c["d"] = cell.d;
            c["connected"] = cell.connected;
            c["components"] = cell.component_count;
            c["ok"] = cell.ok;
            if (!cell.error.empty()) c["error"] = cell.error;
            if (std::isfinite(cell.residual)) c["residual"] = cell.residual;
            c["eigenvalues"] = cell.eigenvalues;
            if (m == "isomap" && cell.ok) c["explained"] = cell.embedding.explained_variance;
            cells_json.push_back(c);
        }
        // one coordinates file per neighborhood size, at the deepest dimension
        for (int k : cfg_.neighborhoods) {
            const SweepCell* deepest = nullptr;
            for (const auto& cell : cells)
                if (cell.k == k && cell.ok && (!deepest || cell.d > deepest->d)) deepest = &cell;
            if (deepest)
                write_artifact("embeddings/" + m + "_k" + std::to_string(k) + ".csv",
                               embedding_csv(ds_, deepest->embedding.coords, cfg_.seed));
        }
        sweep_cells_[m] = std::move(cells);
    }

    json state;
    state["seed"] = cfg_.seed;
    state["cells"] = cells_json;
    write_artifact(stage_state_rel("sweep"), state.dump(2) + "\n");
    have_sweep_ = true;
}

std::vector<LabeledEmbedding> Pipeline::collect_embeddings(const std::vector<int>& wanted_dims,
                                                           std::vector<std::string>* missing) const {
    std::vector<LabeledEmbedding> out;
    auto note = [&](const std::string& what) {
        if (missing) missing->push_back(what);
    };
    for (const auto& m : cfg_.methods) {
        if (m == "pca" || m == "cmds") {
            if (!have_embed_) {
                note(m + ": embed stage did not run");
                continue;
            }
            const Embedding& emb = m == "pca" ? pca_ : cmds_;
            for (int d : wanted_dims) {
                if (d <= d_lin_)
                    out.push_back({m, -1, d, emb.coords.left_cols(d)});
                else
                    note(m + " d=" + std::to_string(d) + ": beyond computed dimension");
            }
        } else {
            if (!have_sweep_) {
                note(m + ": sweep stage did not run");
                continue;
            }
            const auto it = sweep_cells_.find(m);
            for (int k : cfg_.neighborhoods) {
                for (int d : wanted_dims) {
                    const SweepCell* found = nullptr;
                    if (it != sweep_cells_.end())
                        for (const auto& cell : it->second)
                            if (cell.k == k && cell.d == d) {
                                found = &cell;
                                break;
                            }
                    if (found && found->ok)
                        out.push_back({m, k, d, found->embedding.coords});
                    else
                        note(m + " k=" + std::to_string(k) + " d=" + std::to_string(d) + ": " +
                             (found ? found->error : "not computed"));
                }
            }
        }
    }
    return out;
}

void Pipeline::cluster() {
    require_dataset();
    if (!have_embed_ && !have_sweep_) throw Error("cluster stage needs embed or sweep results");

    std::vector<std::string> missing;
    const auto embs = collect_embeddings(cfg_.cluster_dims, &missing);
    auto cells = dbi_sweep(embs, cfg_.cluster_counts, derive_seed(cfg_.seed, "stage_cluster"),
                           cfg_.kmeans_restarts);

    // lowest DBI per method
    std::map<std::string, const DbiCell*> best;
    for (const auto& cell : cells) {
        if (!cell.ok) continue;
        auto [it, inserted] = best.try_emplace(cell.method, &cell);
        if (!inserted && cell.dbi < it->second->dbi) it->second = &cell;
    }

    json cells_json = json::array();
    for (const auto& cell : cells) {
        json c;
        c["method"] = cell.method;
        c["k"] = cell.k;
        c["d"] = cell.d;
        c["n_clusters"] = cell.n_clusters;
        c["ok"] = cell.ok;
        if (cell.ok) {
            c["dbi"] = cell.dbi;
            c["objective"] = cell.objective;
        } else {
            c["error"] = cell.error;
        }
        cells_json.push_back(c);
    }

    json best_json = json::array();
    for (const auto& m : cfg_.methods) {
        const auto it = best.find(m);
        if (it == best.end()) continue;
        const DbiCell& cell = *it->second;
        std::string name = cell.method;
        if (cell.k >= 0) name += "_k" + std::to_string(cell.k);
        name += "_d" + std::to_string(cell.d) + "_c" + std::to_string(cell.n_clusters);
        const std::string rel = "clusters/" + name + ".csv";

        std::string csv = "# seed=" + std::to_string(cfg_.seed) + "\n";
        csv += "instance,sample_id,compound,assignment\n";
        for (std::size_t i = 0; i < cell.assignments.size(); ++i)
            csv += std::to_string(i) + "," + ds_.sample_ids[i] + "," + ds_.labels[i] + "," +
                   std::to_string(cell.assignments[i]) + "\n";
        write_artifact(rel, csv);

        json b;
        b["method"] = cell.method;
        b["k"] = cell.k;
        b["d"] = cell.d;
        b["n_clusters"] = cell.n_clusters;
        b["dbi"] = cell.dbi;
        b["file"] = rel;
        best_json.push_back(b);
    }

    json state;
    state["seed"] = cfg_.seed;
    state["restarts"] = cfg_.kmeans_restarts;
    state["scatter_exponent_q"] = 1;
    state["separation_exponent_p"] = 2;
    state["missing"] = missing;
    state["cells"] = cells_json;
    state["best"] = best_json;
    write_artifact(stage_state_rel("cluster"), state.dump(2) + "\n");
}

void Pipeline::classify() {
    require_dataset();

    std::vector<std::string> missing;
    auto embs = collect_embeddings(cfg_.dims, &missing);
    if (cfg_.baseline_raw) {
        LabeledEmbedding raw;
        raw.method = "raw";
        raw.k = -1;
        raw.d = static_cast<int>(ds_.n_features());
        raw.coords = ds_.intensities;
        embs.insert(embs.begin(), std::move(raw));
    }
    if (embs.empty()) throw Error("classify stage has no embeddings to evaluate");

    const auto cells = accuracy_sweep(embs, class_labels_, cfg_.degrees, cfg_.folds,
                                      derive_seed(cfg_.seed, "stage_classify"), cfg_.svm_c,
                                      cfg_.standardize, cfg_.inhomogeneous, cfg_.svm_tol,
                                      cfg_.svm_max_iterations);

    // highest mean accuracy per (method, neighborhood) group
    std::map<std::pair<std::string, int>, const AccuracyCell*> best;
    for (const auto& cell : cells) {
        if (!cell.ok) continue;
        auto [it, inserted] = best.try_emplace({cell.method, cell.k}, &cell);
        if (!inserted && cell.mean_accuracy > it->second->mean_accuracy) it->second = &cell;
    }

    json cells_json = json::array();
    for (const auto& cell : cells) {
        json c;
        c["method"] = cell.method;
        c["k"] = cell.k;
        c["d"] = cell.d;
        c["degree"] = cell.degree;
        c["ok"] = cell.ok;
        if (cell.ok) {
            c["mean"] = cell.mean_accuracy;
            c["stddev"] = cell.stddev;
            c["converged"] = cell.all_converged;
        } else {
            c["error"] = cell.error;
        }
        cells_json.push_back(c);
    }

    json best_json = json::array();
    std::vector<std::string> group_order = {"raw"};
    group_order.insert(group_order.end(), cfg_.methods.begin(), cfg_.methods.end());
    for (const auto& m : group_order) {
        for (const auto& [key, cell] : best) {
            if (key.first != m) continue;
            json b;
            b["method"] = cell->method;
            b["k"] = cell->k;
            b["d"] = cell->d;
            b["degree"] = cell->degree;
            b["mean"] = cell->mean_accuracy;
            b["stddev"] = cell->stddev;
            best_json.push_back(b);
        }
    }

    json state;
    state["seed"] = cfg_.seed;
    state["folds"] = cfg_.folds;
    state["c"] = cfg_.svm_c;
    state["standardize"] = cfg_.standardize;
    state["inhomogeneous"] = cfg_.inhomogeneous;
    state["tol"] = cfg_.svm_tol;
    state["stddev_kind"] = "sample_over_folds";
    state["fold_shuffle"] = "seeded_stratified";
    state["missing"] = missing;
    state["cells"] = cells_json;
    state["best"] = best_json;
    write_artifact(stage_state_rel("classify"), state.dump(2) + "\n");
}

namespace {

std::string seed_header(const json& state) {
    return "# seed=" + std::to_string(state.at("seed").get<std::uint64_t>()) + "\n";
}

std::string render_table1(const json& state) {
    std::string csv = seed_header(state);
    csv += "compound,region_low_nm,region_high_nm,expected_intensity,raw_mean\n";
    for (const auto& row : state.at("rows")) {
        csv += row.at("compound").get<std::string>() + "," +
               format_double(row.at("low_nm").get<double>()) + "," +
               format_double(row.at("high_nm").get<double>()) + "," +
               format_double(row.at("expected_intensity").get<double>()) + "," +
               format_double(row.at("raw_mean").get<double>()) + "\n";
    }
    return csv;
}

void append_spectrum_rows(std::string& csv, const std::string& method, int k, const json& block) {
    const auto eigenvalues = block.at("eigenvalues").get<std::vector<double>>();
    const auto explained = block.at("explained").get<std::vector<double>>();
    // eigenvalues carry the full spectrum; only the embedded components have
    // an explained share, so the table stops there
    double cumulative = 0.0;
    for (std::size_t i = 0; i < explained.size() && i < eigenvalues.size(); ++i) {
        const double pct = 100.0 * explained[i];
        cumulative += pct;
        csv += method + "," + std::to_string(k) + "," + std::to_string(i + 1) + "," +
               format_double(eigenvalues[i]) + "," + format_double(pct) + "," +
               format_double(cumulative) + "\n";
    }
}

std::string render_table2(const std::string& run_dir, const json& state) {
    std::string csv = seed_header(state);
    csv += "method,k,component,eigenvalue,explained_pct,cumulative_pct\n";
    append_spectrum_rows(csv, "pca", -1, state.at("pca"));
    append_spectrum_rows(csv, "cmds", -1, state.at("cmds"));
    if (has_state(run_dir, "sweep")) {
        const json sweep = load_state(run_dir, "sweep");
        std::map<int, const json*> deepest; // k -> isomap cell with max d
        for (const auto& cell : sweep.at("cells")) {
            if (cell.at("method").get<std::string>() != "isomap" || !cell.at("ok").get<bool>())
                continue;
            const int k = cell.at("k").get<int>();
            auto [it, inserted] = deepest.try_emplace(k, &cell);
            if (!inserted && cell.at("d").get<int>() > it->second->at("d").get<int>())
                it->second = &cell;
        }
        for (const auto& [k, cell] : deepest) append_spectrum_rows(csv, "isomap", k, *cell);
    }
    return csv;
}

std::string render_table3(const json& state) {
    std::string csv = seed_header(state);
    csv += "method,k,d,n_clusters,dbi\n";
    for (const auto& b : state.at("best")) {
        csv += b.at("method").get<std::string>() + "," + std::to_string(b.at("k").get<int>()) +
               "," + std::to_string(b.at("d").get<int>()) + "," +
               std::to_string(b.at("n_clusters").get<int>()) + "," +
               format_double(b.at("dbi").get<double>()) + "\n";
    }
    return csv;
}

std::string render_table4(const json& state) {
    std::string csv = seed_header(state);
    csv += "method,k,d,degree,mean_accuracy_pct,stddev_pct\n";
    for (const auto& b : state.at("best")) {
        csv += b.at("method").get<std::string>() + "," + std::to_string(b.at("k").get<int>()) +
               "," + std::to_string(b.at("d").get<int>()) + "," +
               std::to_string(b.at("degree").get<int>()) + "," +
               format_double(100.0 * b.at("mean").get<double>()) + "," +
               format_double(100.0 * b.at("stddev").get<double>()) + "\n";
    }
    return csv;
}

std::string render_scree(const std::string& run_dir, const json& sweep_state) {
    std::string csv = seed_header(sweep_state);
    csv += "method,k,d,residual_variance\n";
    if (has_state(run_dir, "embed")) {
        const json embed = load_state(run_dir, "embed");
        for (const char* m : {"pca", "cmds"}) {
            const json& block = embed.at(m);
            const auto dims = block.at("residual_dims").get<std::vector<int>>();
            const auto residual = block.at("residual").get<std::vector<double>>();
            for (std::size_t i = 0; i < dims.size(); ++i)
                csv += std::string(m) + ",-1," + std::to_string(dims[i]) + "," +
                       format_double(residual[i]) + "\n";
        }
    }
    for (const auto& cell : sweep_state.at("cells")) {
        if (!cell.at("ok").get<bool>() || !cell.contains("residual")) continue;
        csv += cell.at("method").get<std::string>() + "," +
               std::to_string(cell.at("k").get<int>()) + "," +
               std::to_string(cell.at("d").get<int>()) + "," +
               format_double(cell.at("residual").get<double>()) + "\n";
    }
    return csv;
}

std::string render_dbi(const json& state) {
    std::string csv = seed_header(state);
    csv += "method,k,d,n_clusters,dbi\n";
    for (const auto& cell : state.at("cells")) {
        if (!cell.at("ok").get<bool>()) continue;
        csv += cell.at("method").get<std::string>() + "," +
               std::to_string(cell.at("k").get<int>()) + "," +
               std::to_string(cell.at("d").get<int>()) + "," +
               std::to_string(cell.at("n_clusters").get<int>()) + "," +
               format_double(cell.at("dbi").get<double>()) + "\n";
    }
    return csv;
}

std::string render_errorbar(const json& state) {
    std::string csv = seed_header(state);
    csv += "method,k,d,K,mean,std\n";
    for (const auto& cell : state.at("cells")) {
        if (!cell.at("ok").get<bool>()) continue;
        csv += cell.at("method").get<std::string>() + "," +
               std::to_string(cell.at("k").get<int>()) + "," +
               std::to_string(cell.at("d").get<int>()) + "," +
               std::to_string(cell.at("degree").get<int>()) + "," +
               format_double(100.0 * cell.at("mean").get<double>()) + "," +
               format_double(100.0 * cell.at("stddev").get<double>()) + "\n";
    }
    return csv;
}

std::string render_entropy(const json& state) {
    std::string csv = seed_header(state);
    csv += "wavelength_nm,compound,h,log10_h\n";
    const auto wavelengths = state.at("wavelengths").get<std::vector<double>>();
    for (const auto& p : state.at("profiles")) {
        const std::string compound = p.at("compound").get<std::string>();
        const auto h = p.at("h").get<std::vector<double>>();
        const auto log10_h = p.at("log10_h").get<std::vector<double>>();
        for (std::size_t t = 0; t < wavelengths.size(); ++t)
            csv += format_double(wavelengths[t]) + "," + compound + "," + format_double(h[t]) +
                   "," + format_double(log10_h[t]) + "\n";
    }
    return csv;
}

} // namespace

std::string emit_report(const std::string& run_dir, const std::string& kind) {
    const auto file_it = kReportFile.find(kind);
    if (file_it == kReportFile.end())
        throw Error("unknown report kind '" + kind +
                    "' (expected table1|table2|table3|table4|scree|dbi|errorbar|entropy)");
    const std::string& stage = kReportStage.at(kind);
    const json state = load_state(run_dir, stage);

    std::string csv;
    if (kind == "table1") csv = render_table1(state);
    else if (kind == "table2") csv = render_table2(run_dir, state);
    else if (kind == "table3") csv = render_table3(state);
    else if (kind == "table4") csv = render_table4(state);
    else if (kind == "scree") csv = render_scree(run_dir, state);
    else if (kind == "dbi") csv = render_dbi(state);
    else if (kind == "errorbar") csv = render_errorbar(state);
    else csv = render_entropy(state);

    const fs::path path = fs::path(run_dir) / file_it->second;
    fs::create_directories(path.parent_path());
    auto out = open_output(path.string());
    out << csv;
    out.close();
    if (!out) throw Error("failed writing " + path.string());
    return path.string();
}

RunManifest run_pipeline(const RunConfig& cfg) {
    Pipeline p(cfg);
    RunManifest manifest;
    manifest.seed = cfg.seed;
    manifest.config_json = cfg.to_json();

    using StageFn = void (Pipeline::*)();
    const std::vector<std::pair<std::string, StageFn>> stages = {
        {"ingest", nullptr},         {"regions", &Pipeline::regions},
        {"entropy", &Pipeline::entropy}, {"lines", &Pipeline::lines},
        {"embed", &Pipeline::embed},     {"sweep", &Pipeline::sweep},
        {"cluster", &Pipeline::cluster}, {"classify", &Pipeline::classify},
    };

    bool aborted = false;
    for (const auto& [name, fn] : stages) {
        StageResult res;
        res.name = name;
        if (aborted) {
            manifest.stages.push_back(res);
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        try {
            if (name == "ingest")
                p.ingest();
            else
                (p.*fn)();
            res.status = "ok";
        } catch (const std::exception& e) {
            res.status = "error";
            res.error = e.what();
            if (name == "ingest") aborted = true; // nothing downstream can run
        }
        res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest.stages.push_back(res);
    }

    // render every report whose stage produced state
    StageResult report_stage;
    report_stage.name = "report";
    const auto report_start = std::chrono::steady_clock::now();
    std::vector<std::string> report_files;
    std::string report_errors;
    static const std::vector<std::string> kinds = {"table1", "table2", "table3",   "table4",
                                                   "scree",  "dbi",    "errorbar", "entropy"};
    for (const auto& kind : kinds) {
        if (!has_state(cfg.out_dir, kReportStage.at(kind))) continue;
        try {
            emit_report(cfg.out_dir, kind);
            report_files.push_back(kReportFile.at(kind));
        } catch (const std::exception& e) {
            if (!report_errors.empty()) report_errors += "; ";
            report_errors += kind + ": " + e.what();
        }
    }
    report_stage.status = report_errors.empty() ? "ok" : "error";
    report_stage.error = report_errors;
    report_stage.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - report_start).count();
    if (aborted) report_stage.status = "skipped";
    manifest.stages.push_back(report_stage);

    std::vector<std::string> all_files = p.written();
    all_files.insert(all_files.end(), report_files.begin(), report_files.end());
    for (const auto& rel : all_files)
        manifest.files[rel] = hex16(fnv1a64_file((fs::path(cfg.out_dir) / rel).string()));

    fs::create_directories(cfg.out_dir);
    auto out = open_output((fs::path(cfg.out_dir) / "manifest.json").string());
    out << manifest.to_json();
    out.close();
    if (!out) throw Error("failed writing manifest.json");
    return manifest;
}

} // namespace specmap
