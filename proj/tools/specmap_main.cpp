#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"

#include "specmap/error.hpp"
#include "specmap/harness.hpp"

namespace {

// "2,3,5", "1..10", or a single value
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    const auto dots = text.find("..");
    if (dots != std::string::npos) {
        const int lo = std::stoi(text.substr(0, dots));
        const int hi = std::stoi(text.substr(dots + 2));
        if (hi < lo) throw specmap::Error("bad range '" + text + "'");
        for (int v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find(',', start);
        const std::string item =
            pos == std::string::npos ? text.substr(start) : text.substr(start, pos - start);
        if (!item.empty()) out.push_back(std::stoi(item));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (out.empty()) throw specmap::Error("empty list '" + text + "'");
    return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find(',', start);
        const std::string item =
            pos == std::string::npos ? text.substr(start) : text.substr(start, pos - start);
        if (!item.empty()) out.push_back(item);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

bool wants_linear(const std::vector<std::string>& methods) {
    for (const auto& m : methods)
        if (m == "pca" || m == "cmds") return true;
    return false;
}

bool wants_nonlinear(const std::vector<std::string>& methods) {
    for (const auto& m : methods)
        if (m == "isomap" || m == "lle") return true;
    return false;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral-map: spectral statistics, manifold embeddings, clustering and "
                 "classification for emission spectra"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;
    auto* opt_config = app.add_option("--config", config_path, "JSON config file");
    auto* opt_seed = app.add_option("--seed", seed, "master seed (overrides config)");
    auto* opt_out = app.add_option("--out", out_dir, "output directory (overrides config)");
    app.add_option("--threads", threads, "OpenMP thread count; affects speed only");

    std::string input, format_name;
    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--input", input, "dataset path (overrides config)");
        sub->add_option("--format", format_name, "wide_csv or manifest");
        sub->fallthrough();
    };

    auto* sc_ingest = app.add_subcommand("ingest", "load a dataset, write the canonical CSV and report");
    add_input(sc_ingest);
    auto* sc_validate = app.add_subcommand("validate", "load a dataset and print its report");
    add_input(sc_validate);

    int n_regions = 0, n_bins = 0;
    auto* sc_regions = app.add_subcommand("regions", "region totals and expected intensities");
    add_input(sc_regions);
    sc_regions->add_option("--regions", n_regions, "number of spectral regions");
    sc_regions->add_option("--bins", n_bins, "histogram bins for expected intensity");

    double log_floor = 0.0;
    auto* sc_entropy = app.add_subcommand("entropy", "entropy-density profiles per compound");
    add_input(sc_entropy);
    auto* opt_floor = sc_entropy->add_option("--floor", log_floor, "log10 floor for zero entries");

    double tolerance = 0.0;
    auto* sc_lines = app.add_subcommand("lines", "match reference emission lines");
    add_input(sc_lines);
    auto* opt_tol = sc_lines->add_option("--tolerance", tolerance, "match tolerance in nm");

    std::string dims_text, neighborhoods_text, methods_text, degrees_text, counts_text;
    auto* sc_embed = app.add_subcommand("embed", "linear embeddings (pca, cmds)");
    add_input(sc_embed);
    sc_embed->add_option("--dims", dims_text, "target dimensions, e.g. 1..10 or 2,5");

    auto* sc_sweep = app.add_subcommand("sweep", "isomap/lle neighborhood sweep");
    add_input(sc_sweep);
    sc_sweep->add_option("--dims", dims_text, "target dimensions");
    sc_sweep->add_option("--neighborhoods", neighborhoods_text, "neighborhood sizes");
    sc_sweep->add_option("--methods", methods_text, "methods to run");

    auto* sc_cluster = app.add_subcommand("cluster", "k-means sweep with Davies-Bouldin scores");
    add_input(sc_cluster);
    sc_cluster->add_option("--counts", counts_text, "cluster counts");
    sc_cluster->add_option("--dims", dims_text, "embedding dimensions to cluster");
    sc_cluster->add_option("--neighborhoods", neighborhoods_text, "neighborhood sizes");
    sc_cluster->add_option("--methods", methods_text, "methods to cluster");

    double svm_c = 0.0;
    int folds = 0;
    auto* sc_classify = app.add_subcommand("classify", "cross-validated SVM accuracy sweep");
    add_input(sc_classify);
    sc_classify->add_option("--folds", folds, "cross-validation folds");
    sc_classify->add_option("--degrees", degrees_text, "polynomial kernel degrees");
    sc_classify->add_option("--dims", dims_text, "embedding dimensions");
    sc_classify->add_option("--neighborhoods", neighborhoods_text, "neighborhood sizes");
    sc_classify->add_option("--methods", methods_text, "methods to classify");
    auto* opt_c = sc_classify->add_option("--C", svm_c, "SVM regularization constant");

    auto* sc_run = app.add_subcommand("run", "execute the full pipeline and write a manifest");
    add_input(sc_run);

    std::string kind;
    auto* sc_report = app.add_subcommand("report", "render one report from stage state");
    sc_report->add_option("--kind", kind, "table1|table2|table3|table4|scree|dbi|errorbar|entropy")
        ->required();
    sc_report->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (threads > 0) omp_set_num_threads(threads);

        specmap::RunConfig cfg;
        if (opt_config->count()) cfg = specmap::RunConfig::from_file(config_path);
        if (!input.empty()) cfg.input = input;
        if (!format_name.empty()) {
            if (format_name == "wide_csv")
                cfg.format = specmap::DataFormat::wide_csv;
            else if (format_name == "manifest")
                cfg.format = specmap::DataFormat::manifest;
            else
                throw specmap::Error("unknown --format '" + format_name + "'");
        }
        if (opt_seed->count()) cfg.seed = seed;
        if (opt_out->count()) cfg.out_dir = out_dir;

        if (!dims_text.empty()) {
            if (sc_cluster->parsed())
                cfg.cluster_dims = parse_int_list(dims_text);
            else
                cfg.dims = parse_int_list(dims_text);
        }
        if (!neighborhoods_text.empty()) cfg.neighborhoods = parse_int_list(neighborhoods_text);
        if (!methods_text.empty()) cfg.methods = parse_name_list(methods_text);
        if (!degrees_text.empty()) cfg.degrees = parse_int_list(degrees_text);
        if (!counts_text.empty()) cfg.cluster_counts = parse_int_list(counts_text);
        if (sc_regions->parsed() && n_regions > 0) cfg.regions = n_regions;
        if (sc_regions->parsed() && n_bins > 0) cfg.bins = n_bins;
        if (opt_floor->count()) cfg.entropy_log_floor = log_floor;
        if (opt_tol->count()) cfg.line_tolerance_nm = tolerance;
        if (sc_classify->parsed() && folds > 0) cfg.folds = folds;
        if (opt_c->count()) cfg.svm_c = svm_c;
        cfg.validate();

        if (sc_report->parsed()) {
            std::printf("%s\n", specmap::emit_report(cfg.out_dir, kind).c_str());
            return 0;
        }
        if (sc_validate->parsed()) {
            const auto ds = specmap::load_dataset(cfg.input, cfg.format);
            std::printf("%s", specmap::validate_dataset(ds).to_json().c_str());
            return 0;
        }
        if (sc_run->parsed()) {
            const auto manifest = specmap::run_pipeline(cfg);
            bool ingest_failed = false;
            for (const auto& s : manifest.stages) {
                std::printf("%-10s %-8s %.2fs%s%s\n", s.name.c_str(), s.status.c_str(), s.seconds,
                            s.error.empty() ? "" : "  ", s.error.c_str());
                if (s.name == "ingest" && s.status == "error") ingest_failed = true;
            }
            std::printf("%s/manifest.json\n", cfg.out_dir.c_str());
            return ingest_failed ? 2 : 0;
        }

        specmap::Pipeline p(cfg);
        if (sc_ingest->parsed()) {
            p.ingest(true);
            std::printf("%s/dataset.csv\n%s/dataset_report.json\n", cfg.out_dir.c_str(),
                        cfg.out_dir.c_str());
            return 0;
        }

        p.ingest();
        auto emit = [&](const char* k) {
            std::printf("%s\n", specmap::emit_report(cfg.out_dir, k).c_str());
        };
        if (sc_regions->parsed()) {
            p.regions();
            emit("table1");
        } else if (sc_entropy->parsed()) {
            p.entropy();
            emit("entropy");
        } else if (sc_lines->parsed()) {
            p.lines();
            std::printf("%s/lines.csv\n", cfg.out_dir.c_str());
        } else if (sc_embed->parsed()) {
            p.embed();
            emit("table2");
        } else if (sc_sweep->parsed()) {
            p.sweep();
            emit("scree");
        } else if (sc_cluster->parsed()) {
            if (wants_linear(cfg.methods)) p.embed();
            if (wants_nonlinear(cfg.methods)) p.sweep();
            p.cluster();
            emit("table3");
            emit("dbi");
        } else if (sc_classify->parsed()) {
            if (wants_linear(cfg.methods)) p.embed();
            if (wants_nonlinear(cfg.methods)) p.sweep();
            p.classify();
            emit("table4");
            emit("errorbar");
        }
        return 0;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
