#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "specmap/cluster_eval.hpp"
#include "specmap/dataset.hpp"
#include "specmap/linear_embed.hpp"
#include "specmap/manifold_embed.hpp"
#include "specmap/svm.hpp"

namespace specmap {

// Whole-pipeline configuration, one JSON document. The defaults are the
// replay parameters: 8 regions, 10 histogram bins, 10-fold CV, kernel
// degrees 1..5, target dimensions 1..10, neighborhood sizes
// {8, 15, 30, 100, 200}.
struct RunConfig {
    std::string input;
    DataFormat format = DataFormat::wide_csv;
    std::string out_dir = "out";
    std::uint64_t seed = 42;

    int regions = 8;
    int bins = 10;
    std::vector<std::string> methods{"pca", "cmds", "isomap", "lle"};
    std::vector<int> neighborhoods{8, 15, 30, 100, 200};
    std::vector<int> dims{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> degrees{1, 2, 3, 4, 5};
    int folds = 10;
    std::vector<int> cluster_counts{2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<int> cluster_dims{2, 3, 5, 7, 10};
    double svm_c = 1.0;
    bool standardize = true;
    bool inhomogeneous = false;
    bool baseline_raw = true;
    double svm_tol = 1e-3;
    long long svm_max_iterations = 0; // 0 selects the built-in cap
    int kmeans_restarts = 10;
    double lle_reg_scale = 1e-3;
    double entropy_log_floor = -12.0;
    double line_tolerance_nm = 0.5;

    static RunConfig from_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
    std::string to_json() const;
    void validate() const;
};

struct StageResult {
    std::string name;
    std::string status = "skipped"; // ok | error | skipped
    double seconds = 0.0;
    std::string error;
};

struct RunManifest {
    std::uint64_t seed = 0;
    std::string config_json;
    std::vector<StageResult> stages;
    std::map<std::string, std::string> files; // relative path -> fnv1a64 hex

    std::string to_json() const;
};

// Stage driver. Stages write their artifacts under cfg.out_dir as they run;
// each stage requires its predecessors to have run in this process (ingest
// before everything, embed/sweep before cluster/classify). Per-cell failures
// inside sweeps are recorded in the stage state files and never throw.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg);

    void ingest(bool write_canonical_csv = false);
    void regions();
    void entropy();
    void lines();
    void embed();
    void sweep();
    void cluster();
    void classify();

    const RunConfig& config() const { return cfg_; }
    const SpectralDataset& dataset() const;
    const std::vector<std::string>& written() const { return written_; }

private:
    void require_dataset() const;
    void write_artifact(const std::string& rel, const std::string& content);
    std::vector<int> usable_dims(std::size_t cap) const;
    std::vector<LabeledEmbedding> collect_embeddings(const std::vector<int>& wanted_dims,
                                                     std::vector<std::string>* missing) const;

    RunConfig cfg_;
    bool loaded_ = false;
    SpectralDataset ds_;
    std::vector<int> class_labels_; // per instance, index into ds_.classes

    bool have_embed_ = false;
    int d_lin_ = 0;
    Embedding pca_;
    Embedding cmds_;

    bool have_sweep_ = false;
    std::map<std::string, std::vector<SweepCell>> sweep_cells_; // method name -> cells

    std::vector<std::string> written_;
};

// Executes every stage in order, then renders every report whose stage
// succeeded, then writes <out>/manifest.json. A dataset that fails to load
// aborts the run; any other stage failure is recorded and the remaining
// independent stages still execute.
RunManifest run_pipeline(const RunConfig& cfg);

// Renders one report kind (table1|table2|table3|table4|scree|dbi|errorbar|
// entropy) from the stage state files under run_dir. Returns the path of the
// file written. Throws if the backing stage has not produced its state.
std::string emit_report(const std::string& run_dir, const std::string& kind);

} // namespace specmap
