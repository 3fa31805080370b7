#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mtfda/analysis.hpp"
#include "mtfda/datasets.hpp"
#include "mtfda/edit_distance.hpp"
#include "mtfda/errors.hpp"
#include "mtfda/io.hpp"
#include "mtfda/merge_tree.hpp"
#include "mtfda/persistence.hpp"
#include "mtfda/pruning.hpp"
#include "mtfda/tree_stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Meta {
    std::string command;
    json parameters = json::object();
    std::vector<std::string> inputs;
};

void write_metadata(const std::string& out_dir, const Meta& meta) {
    json j;
    j["command"] = meta.command;
    j["parameters"] = meta.parameters;
    j["inputs"] = meta.inputs;
    j["version"] = kVersion;
    mtfda::atomic_write_file((fs::path(out_dir) / "metadata.json").string(), j.dump(2) + "\n");
}

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw mtfda::data_error("cannot create output directory '" + out_dir + "'");
}

std::vector<mtfda::WeightedMergeTree> load_tree_dir(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) throw mtfda::data_error("'" + dir + "' is not a directory of trees");
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".json" && entry.path().filename() != "metadata.json")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<mtfda::WeightedMergeTree> trees;
    for (const auto& f : files) trees.push_back(mtfda::merge_tree_from_json(mtfda::read_file(f)));
    if (trees.empty()) throw mtfda::data_error("no tree JSON files under '" + dir + "'");
    return trees;
}

void save_tree_dir(const std::string& out_dir, const std::vector<mtfda::WeightedMergeTree>& trees) {
    // fill a temp directory first so an interrupted run leaves no partial set
    fs::path trees_dir = fs::path(out_dir) / "trees";
    fs::path tmp_dir = fs::path(out_dir) / "trees.tmp";
    std::error_code ec;
    fs::remove_all(tmp_dir, ec);
    fs::create_directories(tmp_dir, ec);
    if (ec) throw mtfda::data_error("cannot create '" + tmp_dir.string() + "'");
    for (const auto& t : trees)
        mtfda::atomic_write_file((tmp_dir / (t.tree.id + ".json")).string(), mtfda::to_json(t) + "\n");
    fs::remove_all(trees_dir, ec);
    fs::rename(tmp_dir, trees_dir, ec);
    if (ec) throw mtfda::data_error("cannot move tree set into '" + trees_dir.string() + "'");
}

double parse_K(const std::string& text, const std::vector<mtfda::PLFunction>& fns) {
    if (text == "auto") {
        double k = -std::numeric_limits<double>::infinity();
        for (const auto& f : fns) k = std::max(k, f.max_value());
        return k;
    }
    try {
        return std::stod(text);
    } catch (const std::exception&) {
        throw mtfda::param_error("--K must be 'auto' or a number");
    }
}

std::vector<std::string> labels_for_ids(const std::string& labels_path,
                                        const std::vector<std::string>& ids) {
    auto pairs = mtfda::load_labels_csv(labels_path);
    std::map<std::string, std::string> by_id(pairs.begin(), pairs.end());
    std::vector<std::string> labels;
    for (const auto& id : ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw mtfda::data_error("labels CSV: no label for id '" + id + "'");
        labels.push_back(it->second);
    }
    return labels;
}

// dataset-wide pruning scale: K is the dataset maximum under the auto policy,
// the lowest leaf is the dataset minimum
double dataset_range(const std::vector<mtfda::WeightedMergeTree>& trees) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& t : trees) {
        lo = std::min(lo, t.tree.min_leaf_height());
        hi = std::max(hi, t.K);
    }
    return hi - lo;
}

struct DistJob {
    std::string metric = "edit";
    double p = 1.0;
    bool drop_essential = false;
    int jobs = 0;
};

mtfda::DistanceMatrix pairwise_matrix(const std::vector<mtfda::WeightedMergeTree>& trees,
                                      const DistJob& job) {
    int n = static_cast<int>(trees.size());
    mtfda::DistanceMatrix d;
    for (const auto& t : trees) d.ids.push_back(t.tree.id);
    d.values.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));

    std::vector<mtfda::PersistenceDiagram> pds;
    if (job.metric == "wasserstein") {
        for (const auto& t : trees) {
            auto pd = mtfda::pd_from_merge_tree(t.tree);
            pd.K = t.K;
            pds.push_back(std::move(pd));
        }
    }

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    int jobs = job.jobs > 0 ? job.jobs : static_cast<int>(std::thread::hardware_concurrency());
    if (jobs < 1) jobs = 1;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error_message;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= pairs.size() || failed.load()) return;
            auto [i, j] = pairs[k];
            try {
                double v;
                if (job.metric == "edit")
                    v = mtfda::d_edit(trees[static_cast<std::size_t>(i)],
                                      trees[static_cast<std::size_t>(j)])
                            .distance;
                else
                    v = mtfda::wasserstein(pds[static_cast<std::size_t>(i)],
                                           pds[static_cast<std::size_t>(j)], job.p,
                                           job.drop_essential);
                d.values[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
                d.values[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(error_mutex);
                failed = true;
                error_message = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed) throw mtfda::numeric_error("dist: " + error_message);
    d.validate();
    return d;
}

json confusion_to_json(const std::map<std::string, std::map<std::string, int>>& confusion) {
    json j = json::object();
    for (const auto& [truth, row] : confusion) {
        json r = json::object();
        for (const auto& [pred, count] : row) r[pred] = count;
        j[truth] = r;
    }
    return j;
}

void print_confusion(const std::map<std::string, std::map<std::string, int>>& confusion) {
    std::vector<std::string> classes;
    for (const auto& [truth, row] : confusion) {
        (void)row;
        classes.push_back(truth);
    }
    std::cout << "confusion (rows = truth):\n";
    for (const auto& truth : classes) {
        std::cout << "  " << truth << ":";
        for (const auto& pred : classes) {
            int count = 0;
            auto it = confusion.find(truth);
            if (it != confusion.end()) {
                auto jt = it->second.find(pred);
                if (jt != it->second.end()) count = jt->second;
            }
            std::cout << " " << pred << "=" << count;
        }
        std::cout << "\n";
    }
}

int run(int argc, char** argv) {
    CLI::App app{"merge-tree representations of one-dimensional functional data"};
    app.require_subcommand(1);

    // ------------------------------------------------------------------ simulate
    auto* sim = app.add_subcommand("simulate", "generate a simulated functional dataset");
    std::string sim_scenario, sim_out;
    std::uint64_t sim_seed = 0;
    int sim_ngrid = 100;
    double sim_sigma = 0.1;
    sim->add_option("--scenario", sim_scenario, "example1|example2|example3|noisy_sine")->required();
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_option("--seed", sim_seed, "random seed");
    sim->add_option("--n-grid", sim_ngrid, "grid size for noisy_sine");
    sim->add_option("--sigma", sim_sigma, "noise level for noisy_sine");

    // ---------------------------------------------------------------- build-trees
    auto* bt = app.add_subcommand("build-trees", "build merge trees from a functions CSV");
    std::string bt_input, bt_out, bt_K = "auto";
    bt->add_option("--input", bt_input, "functions CSV")->required();
    bt->add_option("--out", bt_out, "output directory")->required();
    bt->add_option("--K", bt_K, "truncation constant: auto|<value>");

    // ---------------------------------------------------------------------- prune
    auto* pr = app.add_subcommand("prune", "prune a directory of merge trees");
    std::string pr_input, pr_out;
    double pr_eps = -1.0, pr_frac = -1.0;
    pr->add_option("--input", pr_input, "directory with tree JSON files")->required();
    pr->add_option("--out", pr_out, "output directory")->required();
    pr->add_option("--eps", pr_eps, "absolute pruning threshold");
    pr->add_option("--prune-frac", pr_frac, "threshold as a fraction of the dataset range");

    // ---------------------------------------------------------------------- elbow
    auto* el = app.add_subcommand("elbow", "average pruned leaf count over a threshold grid");
    std::string el_input, el_out;
    int el_gridn = 101;
    double el_gridmax = -1.0;
    el->add_option("--input", el_input, "directory with tree JSON files")->required();
    el->add_option("--out", el_out, "output directory")->required();
    el->add_option("--grid-n", el_gridn, "number of grid thresholds");
    el->add_option("--grid-max", el_gridmax, "largest threshold (default: dataset range)");

    // ----------------------------------------------------------------------- dist
    auto* di = app.add_subcommand("dist", "pairwise distance matrix");
    std::string di_input, di_out, di_metric = "edit", di_dc, di_dr, di_cert;
    double di_p = 1.0, di_w = 0.5;
    int di_jobs = 0;
    bool di_drop = false;
    di->add_option("--input", di_input, "directory with tree JSON files (edit|wasserstein)");
    di->add_option("--out", di_out, "output directory")->required();
    di->add_option("--metric", di_metric, "edit|wasserstein|mixed");
    di->add_option("--p", di_p, "Wasserstein order (p >= 1)");
    di->add_option("--w", di_w, "mixed-metric weight in [0,1]");
    di->add_option("--dc", di_dc, "first matrix CSV (mixed)");
    di->add_option("--dr", di_dr, "second matrix CSV (mixed)");
    di->add_option("--jobs", di_jobs, "parallel workers (default: cores)");
    di->add_option("--certificate", di_cert, "write the optimal mapping (exactly two trees)");
    di->add_flag("--drop-essential", di_drop, "exclude essential classes from diagrams");

    // ------------------------------------------------------------------------- pd
    auto* pd = app.add_subcommand("pd", "persistence diagrams of trees or functions");
    std::string pd_input, pd_out;
    bool pd_drop = false;
    pd->add_option("--input", pd_input, "tree directory or functions CSV")->required();
    pd->add_option("--out", pd_out, "output directory")->required();
    pd->add_flag("--drop-essential", pd_drop, "omit the essential row");

    // ------------------------------------------------------------------------ mds
    auto* md = app.add_subcommand("mds", "classical MDS embedding of a distance matrix");
    std::string md_input, md_out;
    int md_m = 2;
    md->add_option("--input", md_input, "distance matrix CSV")->required();
    md->add_option("--out", md_out, "output directory")->required();
    md->add_option("--m", md_m, "embedding dimension");

    // ------------------------------------------------------------------ qda-loocv
    auto* qd = app.add_subcommand("qda-loocv", "QDA leave-one-out accuracy on the MDS embedding");
    std::string qd_input, qd_labels, qd_out, qd_dc, qd_dr;
    int qd_m = 2, qd_max_m = 15;
    double qd_w = 0.5;
    bool qd_grid_m = false, qd_grid_w = false;
    qd->add_option("--input", qd_input, "distance matrix CSV (single-metric mode)");
    qd->add_option("--labels", qd_labels, "labels CSV")->required();
    qd->add_option("--out", qd_out, "output directory")->required();
    qd->add_option("--m", qd_m, "MDS dimension");
    qd->add_option("--w", qd_w, "mixed weight (with --dc/--dr)");
    qd->add_option("--dc", qd_dc, "first matrix CSV (mixed mode)");
    qd->add_option("--dr", qd_dr, "second matrix CSV (mixed mode)");
    qd->add_flag("--grid-m", qd_grid_m, "search m = 1..--max-m");
    qd->add_flag("--grid-w", qd_grid_w, "search w over {0,0.05,...,1}");
    qd->add_option("--max-m", qd_max_m, "largest m for --grid-m");

    // --------------------------------------------------------------------- hclust
    auto* hc = app.add_subcommand("hclust", "agglomerative clustering of a distance matrix");
    std::string hc_input, hc_out, hc_linkage = "average";
    hc->add_option("--input", hc_input, "distance matrix CSV")->required();
    hc->add_option("--out", hc_out, "output directory")->required();
    hc->add_option("--linkage", hc_linkage, "single|average|complete");

    // ---------------------------------------------------------------------- stats
    auto* st = app.add_subcommand("stats", "tree functional statistics over a height grid");
    std::string st_input, st_labels, st_out;
    int st_gridn = 512;
    st->add_option("--input", st_input, "directory with tree JSON files")->required();
    st->add_option("--labels", st_labels, "labels CSV (optional; one group otherwise)");
    st->add_option("--out", st_out, "output directory")->required();
    st->add_option("--grid-n", st_gridn, "grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage
    }

    if (sim->parsed()) {
        ensure_out_dir(sim_out);
        mtfda::LabeledFunctions data;
        if (sim_scenario == "example1") {
            data = mtfda::gen_example1();
        } else if (sim_scenario == "example2") {
            data = mtfda::gen_example2(sim_seed);
        } else if (sim_scenario == "example3") {
            data = mtfda::gen_example3(sim_seed);
        } else if (sim_scenario == "noisy_sine") {
            auto ns = mtfda::gen_noisy_sine(sim_seed, sim_ngrid, sim_sigma);
            data.functions = {ns.clean, ns.noisy};
            data.labels = {"clean", "noisy"};
        } else {
            throw mtfda::param_error("unknown scenario '" + sim_scenario + "'");
        }
        mtfda::atomic_write_file((fs::path(sim_out) / "functions.csv").string(),
                                 mtfda::functions_to_csv(data.functions));
        std::string labels_csv = "id,label\n";
        for (std::size_t i = 0; i < data.functions.size(); ++i)
            labels_csv += data.functions[i].id + "," + data.labels[i] + "\n";
        mtfda::atomic_write_file((fs::path(sim_out) / "labels.csv").string(), labels_csv);
        Meta meta{"simulate",
                  {{"scenario", sim_scenario},
                   {"seed", sim_seed},
                   {"n_grid", sim_ngrid},
                   {"sigma", sim_sigma},
                   {"generator", mtfda::SeededNormal::generator_name()}},
                  {}};
        write_metadata(sim_out, meta);
        return 0;
    }

    if (bt->parsed()) {
        ensure_out_dir(bt_out);
        auto fns = mtfda::load_functions_csv(bt_input);
        double K = parse_K(bt_K, fns);
        std::vector<mtfda::WeightedMergeTree> trees;
        for (const auto& f : fns) trees.push_back(mtfda::truncate(mtfda::build_merge_tree(f), K));
        save_tree_dir(bt_out, trees);
        Meta meta{"build-trees", {{"K", K}, {"K_policy", bt_K}}, {bt_input}};
        write_metadata(bt_out, meta);
        return 0;
    }

    if (pr->parsed()) {
        ensure_out_dir(pr_out);
        auto trees = load_tree_dir(pr_input);
        if ((pr_eps >= 0) == (pr_frac >= 0))
            throw mtfda::param_error("prune: give exactly one of --eps or --prune-frac");
        double eps = pr_eps >= 0 ? pr_eps : pr_frac * dataset_range(trees);
        std::vector<mtfda::WeightedMergeTree> pruned;
        for (const auto& t : trees) pruned.push_back(mtfda::prune(t, eps));
        save_tree_dir(pr_out, pruned);
        Meta meta{"prune", {{"eps", eps}, {"prune_frac", pr_frac}}, {pr_input}};
        write_metadata(pr_out, meta);
        return 0;
    }

    if (el->parsed()) {
        ensure_out_dir(el_out);
        auto trees = load_tree_dir(el_input);
        if (el_gridn < 2) throw mtfda::param_error("elbow: --grid-n must be at least 2");
        double top = el_gridmax > 0 ? el_gridmax : dataset_range(trees);
        std::vector<double> grid;
        for (int i = 0; i < el_gridn; ++i) grid.push_back(top * i / (el_gridn - 1));
        auto curve = mtfda::elbow_curve(trees, grid);
        std::string csv = "threshold,avg_leaves\n";
        for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
            csv += mtfda::format_double(curve.thresholds[i]) + "," +
                   mtfda::format_double(curve.avg_leaves[i]) + "\n";
        mtfda::atomic_write_file((fs::path(el_out) / "elbow.csv").string(), csv);
        Meta meta{"elbow", {{"grid_n", el_gridn}, {"grid_max", top}}, {el_input}};
        write_metadata(el_out, meta);
        return 0;
    }

    if (di->parsed()) {
        ensure_out_dir(di_out);
        mtfda::DistanceMatrix d;
        Meta meta{"dist", {{"metric", di_metric}}, {}};
        if (di_metric == "mixed") {
            if (di_dc.empty() || di_dr.empty())
                throw mtfda::param_error("dist --metric mixed needs --dc and --dr matrices");
            auto dc = mtfda::distance_matrix_from_csv(mtfda::read_file(di_dc));
            auto dr = mtfda::distance_matrix_from_csv(mtfda::read_file(di_dr));
            d = mtfda::mixed_distance(dc, dr, di_w);
            meta.parameters["w"] = di_w;
            meta.inputs = {di_dc, di_dr};
        } else if (di_metric == "edit" || di_metric == "wasserstein") {
            if (di_input.empty()) throw mtfda::param_error("dist: --input is required");
            auto trees = load_tree_dir(di_input);
            if (!di_cert.empty()) {
                if (trees.size() != 2)
                    throw mtfda::param_error("--certificate needs exactly two trees in --input");
                auto res = mtfda::d_edit(trees[0], trees[1]);
                mtfda::atomic_write_file(di_cert, mtfda::mapping_to_json(res.mapping) + "\n");
            }
            DistJob job{di_metric, di_p, di_drop, di_jobs};
            d = pairwise_matrix(trees, job);
            meta.parameters["p"] = di_p;
            meta.parameters["drop_essential"] = di_drop;
            meta.parameters["jobs"] = di_jobs;
            meta.inputs = {di_input};
        } else {
            throw mtfda::param_error("dist: unknown metric '" + di_metric + "'");
        }
        d.validate();
        mtfda::atomic_write_file((fs::path(di_out) / "matrix.csv").string(),
                                 mtfda::distance_matrix_to_csv(d));
        write_metadata(di_out, meta);
        return 0;
    }

    if (pd->parsed()) {
        ensure_out_dir(pd_out);
        fs::path pds_dir = fs::path(pd_out) / "pds";
        std::error_code ec;
        fs::create_directories(pds_dir, ec);
        std::vector<mtfda::PersistenceDiagram> diagrams;
        if (fs::is_directory(pd_input)) {
            for (const auto& t : load_tree_dir(pd_input)) {
                auto diagram = mtfda::pd_from_merge_tree(t.tree);
                diagram.K = t.K;
                diagrams.push_back(std::move(diagram));
            }
        } else {
            for (const auto& f : mtfda::load_functions_csv(pd_input)) {
                auto diagram = mtfda::pd_from_function(f);
                diagram.K = f.max_value();
                diagrams.push_back(std::move(diagram));
            }
        }
        for (const auto& diagram : diagrams)
            mtfda::atomic_write_file((pds_dir / (diagram.id + ".csv")).string(),
                                     mtfda::diagram_to_csv(diagram, pd_drop));
        Meta meta{"pd", {{"drop_essential", pd_drop}}, {pd_input}};
        write_metadata(pd_out, meta);
        return 0;
    }

    if (md->parsed()) {
        ensure_out_dir(md_out);
        auto d = mtfda::distance_matrix_from_csv(mtfda::read_file(md_input));
        int negatives = 0;
        auto pts = mtfda::classical_mds(d, md_m, &negatives);
        mtfda::atomic_write_file((fs::path(md_out) / "embedding.csv").string(),
                                 mtfda::embedding_to_csv(d.ids, pts));
        Meta meta{"mds", {{"m", md_m}, {"clipped_negative_eigenvalues", negatives}}, {md_input}};
        write_metadata(md_out, meta);
        return 0;
    }

    if (qd->parsed()) {
        ensure_out_dir(qd_out);
        json report;
        Meta meta{"qda-loocv", json::object(), {}};
        bool mixed_mode = !qd_dc.empty() || !qd_dr.empty();
        if (mixed_mode && (qd_dc.empty() || qd_dr.empty()))
            throw mtfda::param_error("qda-loocv: mixed mode needs both --dc and --dr");
        std::vector<int> ms;
        if (qd_grid_m)
            for (int m = 1; m <= qd_max_m; ++m) ms.push_back(m);
        else
            ms.push_back(qd_m);
        if (mixed_mode) {
            auto dc = mtfda::distance_matrix_from_csv(mtfda::read_file(qd_dc));
            auto dr = mtfda::distance_matrix_from_csv(mtfda::read_file(qd_dr));
            auto labels = labels_for_ids(qd_labels, dc.ids);
            std::vector<double> ws;
            if (qd_grid_w)
                for (int i = 0; i <= 20; ++i) ws.push_back(i * 0.05);
            else
                ws.push_back(qd_w);
            auto best = mtfda::qda_grid_search(dc, dr, labels, ws, ms);
            report["w"] = best.w;
            report["m"] = best.m;
            report["accuracy"] = best.accuracy;
            report["confusion"] = confusion_to_json(best.confusion);
            std::cout << "chosen w=" << best.w << " m=" << best.m << " accuracy=" << best.accuracy
                      << "\n";
            print_confusion(best.confusion);
            meta.inputs = {qd_dc, qd_dr, qd_labels};
        } else {
            if (qd_input.empty()) throw mtfda::param_error("qda-loocv: --input is required");
            auto d = mtfda::distance_matrix_from_csv(mtfda::read_file(qd_input));
            auto labels = labels_for_ids(qd_labels, d.ids);
            double best_acc = -1.0;
            int best_m = ms.front();
            std::map<std::string, std::map<std::string, int>> best_conf;
            for (int m : ms) {
                std::map<std::string, std::map<std::string, int>> conf;
                double acc = mtfda::loocv_accuracy(d, labels, m, &conf);
                if (acc > best_acc) {
                    best_acc = acc;
                    best_m = m;
                    best_conf = std::move(conf);
                }
            }
            report["m"] = best_m;
            report["accuracy"] = best_acc;
            report["confusion"] = confusion_to_json(best_conf);
            std::cout << "chosen m=" << best_m << " accuracy=" << best_acc << "\n";
            print_confusion(best_conf);
            meta.inputs = {qd_input, qd_labels};
        }
        mtfda::atomic_write_file((fs::path(qd_out) / "report.json").string(), report.dump(2) + "\n");
        write_metadata(qd_out, meta);
        return 0;
    }

    if (hc->parsed()) {
        ensure_out_dir(hc_out);
        auto d = mtfda::distance_matrix_from_csv(mtfda::read_file(hc_input));
        auto dend = mtfda::hclust(d, mtfda::linkage_from_string(hc_linkage));
        json j;
        j["n_leaves"] = dend.n_leaves;
        j["linkage"] = hc_linkage;
        j["ids"] = d.ids;
        j["merges"] = json::array();
        for (const auto& m : dend.merges)
            j["merges"].push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}});
        mtfda::atomic_write_file((fs::path(hc_out) / "dendrogram.json").string(), j.dump(2) + "\n");
        auto heights = mtfda::merging_heights(dend);
        std::string csv = "id,merging_height\n";
        for (std::size_t i = 0; i < heights.size(); ++i)
            csv += d.ids[i] + "," + mtfda::format_double(heights[i]) + "\n";
        mtfda::atomic_write_file((fs::path(hc_out) / "merging_heights.csv").string(), csv);
        Meta meta{"hclust", {{"linkage", hc_linkage}}, {hc_input}};
        write_metadata(hc_out, meta);
        return 0;
    }

    if (st->parsed()) {
        ensure_out_dir(st_out);
        auto trees = load_tree_dir(st_input);
        if (st_gridn < 2) throw mtfda::param_error("stats: --grid-n must be at least 2");
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& t : trees) {
            lo = std::min(lo, t.tree.min_leaf_height());
            hi = std::max(hi, std::isfinite(t.K) ? t.K : t.tree.max_finite_height());
        }
        std::vector<double> grid;
        for (int i = 0; i < st_gridn; ++i) grid.push_back(lo + (hi - lo) * i / (st_gridn - 1));

        std::vector<std::string> ids;
        for (const auto& t : trees) ids.push_back(t.tree.id);
        std::vector<std::string> labels(ids.size(), "all");
        if (!st_labels.empty()) labels = labels_for_ids(st_labels, ids);

        std::string stats_csv = "tree_id,statistic,h,value\n";
        std::map<mtfda::TreeStatistic, std::vector<mtfda::StatCurve>> curves;
        for (auto s :
             {mtfda::TreeStatistic::Var, mtfda::TreeStatistic::NLeaves, mtfda::TreeStatistic::NInt})
            for (const auto& t : trees) {
                auto curve = mtfda::stat_curve(t.tree, s, grid);
                for (std::size_t i = 0; i < grid.size(); ++i) {
                    stats_csv += curve.tree_id + "," + mtfda::statistic_name(s) + "," +
                                 mtfda::format_double(grid[i]) + ",";
                    stats_csv +=
                        std::isnan(curve.values[i]) ? "" : mtfda::format_double(curve.values[i]);
                    stats_csv += "\n";
                }
                curves[s].push_back(std::move(curve));
            }
        mtfda::atomic_write_file((fs::path(st_out) / "stats.csv").string(), stats_csv);

        std::string bands_csv = "group,statistic,h,median,mean,q1,q3\n";
        for (auto& [s, group_curves] : curves) {
            auto bands = mtfda::group_bands(group_curves, labels);
            for (const auto& band : bands)
                for (std::size_t i = 0; i < band.grid.size(); ++i) {
                    auto cell = [](double v) {
                        return std::isnan(v) ? std::string() : mtfda::format_double(v);
                    };
                    bands_csv += band.group + "," + mtfda::statistic_name(s) + "," +
                                 mtfda::format_double(band.grid[i]) + "," + cell(band.median[i]) +
                                 "," + cell(band.mean[i]) + "," + cell(band.q1[i]) + "," +
                                 cell(band.q3[i]) + "\n";
                }
        }
        mtfda::atomic_write_file((fs::path(st_out) / "bands.csv").string(), bands_csv);
        Meta meta{"stats", {{"grid_n", st_gridn}}, {st_input}};
        write_metadata(st_out, meta);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mtfda::param_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const mtfda::data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const mtfda::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
