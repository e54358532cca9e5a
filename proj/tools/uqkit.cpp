// uqkit: command-line front end for the uncertainty toolkit.
//
// Subcommands: train, mcpass, conformal, uncertainty, ece, sparsity,
// report, idx-convert. Exit codes: 0 success, 1 computation error,
// 2 usage/IO error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uqkit/blobs.hpp"
#include "uqkit/calibration.hpp"
#include "uqkit/compare.hpp"
#include "uqkit/conformal.hpp"
#include "uqkit/io.hpp"
#include "uqkit/mcdropout.hpp"
#include "uqkit/mininet.hpp"
#include "uqkit/report.hpp"
#include "uqkit/sparsity.hpp"
#include "uqkit/split.hpp"
#include "uqkit/tensor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string format = "json";
};

struct BlobOpts {
    std::size_t samples = 5500;
    std::size_t classes = 3;
    std::size_t dim = 2;
    double distance = 1.0;
    double sigma = 0.5;
};

struct TrainOpts {
    std::string data = "blobs";
    std::string labels_path;
    std::vector<std::size_t> hidden = {32, 16};
    double dropout = 0.5;
    std::size_t epochs = 30;
    std::size_t batch_size = 64;
    double learning_rate = 0.1;
};

std::string out_path(const GlobalOpts& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

// Load feature matrix + labels either from files or as synthetic blobs.
uqkit::BlobData load_dataset(const TrainOpts& t, const BlobOpts& b, std::uint64_t seed) {
    if (t.data == "blobs") {
        return uqkit::make_blobs(b.samples, b.classes, b.dim, b.distance, b.sigma,
                                 uqkit::counter_hash(seed, 0x6c0b5));
    }
    auto tf = uqkit::load_tensor(t.data, 2);
    uqkit::BlobData d;
    d.n = tf.dims[0];
    d.dim = tf.dims[1];
    d.values = std::move(tf.values);
    if (t.labels_path.empty())
        throw uqkit::IoError(uqkit::IoErrorKind::NotFound, "file datasets need --labels");
    d.labels = uqkit::load_labels_csv(t.labels_path);
    if (d.labels.size() != d.n)
        throw uqkit::IoError(uqkit::IoErrorKind::Malformed, "labels length does not match data");
    return d;
}

void save_checkpoint(const GlobalOpts& g, const uqkit::MiniNet& net, const std::string& stem) {
    uqkit::save_weight_vector(out_path(g, stem + ".uqtk"), net.export_weights());
    uqkit::write_json(out_path(g, stem + ".json"), uqkit::mininet_sidecar_json(net));
}

int cmd_train(const GlobalOpts& g, const TrainOpts& t, const BlobOpts& b) {
    auto data = load_dataset(t, b, g.seed);
    std::size_t n_classes = 0;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        n_classes = std::max(n_classes, data.labels.at(i) + 1);

    std::vector<std::size_t> dims;
    dims.push_back(data.dim);
    dims.insert(dims.end(), t.hidden.begin(), t.hidden.end());
    dims.push_back(std::max<std::size_t>(n_classes, 2));

    uqkit::MiniNet net(dims, t.dropout, uqkit::counter_hash(g.seed, 0x1417));
    uqkit::TrainConfig cfg{t.epochs, t.batch_size, t.learning_rate,
                           uqkit::counter_hash(g.seed, 0x7a41)};
    auto history = net.train(data.values, data.n, data.labels, cfg);

    save_checkpoint(g, net, "checkpoint");
    std::ostringstream hist;
    hist.precision(17);
    hist << "epoch,loss,accuracy\n";
    for (std::size_t e = 0; e < history.size(); ++e)
        hist << e << "," << history[e].loss << "," << history[e].accuracy << "\n";
    uqkit::atomic_write(out_path(g, "history.csv"), hist.str());
    std::cout << "trained " << history.size() << " epochs";
    if (!history.empty())
        std::cout << ", final loss " << history.back().loss << ", accuracy "
                  << history.back().accuracy;
    std::cout << "\n";
    return 0;
}

int cmd_mcpass(const GlobalOpts& g, const std::string& checkpoint, const std::string& data_path,
               std::size_t passes) {
    auto net = uqkit::mininet_from_checkpoint(checkpoint + ".uqtk", checkpoint + ".json");
    auto tf = uqkit::load_tensor(data_path, 2);
    auto tensor = net.mc_forward(tf.values, tf.dims[0], passes, uqkit::counter_hash(g.seed, 0x3c9));
    uqkit::save_pass_tensor(out_path(g, "passes.uqtk"), tensor);
    std::cout << "wrote " << passes << " passes for " << tf.dims[0] << " samples\n";
    return 0;
}

struct ConformalArtifacts {
    uqkit::QuantileThreshold q;
    double coverage = 0.0;
    double mean_size = 0.0;
    uqkit::SetSizeHistogram hist;
    uqkit::PredictionSets sets{std::vector<std::uint64_t>{}, 2, true};
};

ConformalArtifacts run_conformal(const uqkit::ProbMatrix& cal_probs, const uqkit::Labels& cal_labels,
                                 const uqkit::ProbMatrix& test_probs,
                                 const uqkit::Labels& test_labels, double alpha,
                                 bool force_argmax) {
    auto scores = uqkit::nonconformity_scores(cal_probs, cal_labels);
    ConformalArtifacts a;
    a.q = uqkit::calibration_quantile(scores, alpha);
    a.sets = uqkit::prediction_sets(test_probs, a.q, force_argmax);
    a.coverage = uqkit::empirical_coverage(a.sets, test_labels);
    a.mean_size = uqkit::mean_set_size(a.sets);
    a.hist = uqkit::set_size_histogram(a.sets, test_labels);
    return a;
}

int cmd_conformal(const GlobalOpts& g, const std::string& cal_probs_path,
                  const std::string& cal_labels_path, const std::string& test_probs_path,
                  const std::string& test_labels_path, double alpha, bool force_argmax,
                  std::size_t score_bins) {
    auto cal_probs = uqkit::load_prob_matrix(cal_probs_path);
    auto cal_labels = uqkit::load_labels_csv(cal_labels_path);
    auto test_probs = uqkit::load_prob_matrix(test_probs_path);
    auto test_labels = uqkit::load_labels_csv(test_labels_path);

    auto scores = uqkit::nonconformity_scores(cal_probs, cal_labels);
    auto a = run_conformal(cal_probs, cal_labels, test_probs, test_labels, alpha, force_argmax);

    uqkit::RunManifest manifest;
    manifest.command = "conformal";
    manifest.inputs = {cal_probs_path, cal_labels_path, test_probs_path, test_labels_path};
    manifest.seed = g.seed;
    manifest.alpha = alpha;
    manifest.out_dir = g.out_dir;

    uqkit::write_json(out_path(g, "conformal.json"),
                      uqkit::conformal_report_json(a.q, a.coverage, a.mean_size, a.hist, manifest));
    uqkit::atomic_write(out_path(g, "set_size_histogram.csv"),
                        uqkit::set_size_histogram_csv(a.hist));
    uqkit::atomic_write(out_path(g, "score_histogram.csv"),
                        uqkit::score_histogram_csv(uqkit::score_histogram(scores, score_bins)));
    std::cout << "q_hat " << a.q.q_hat << ", coverage " << a.coverage << ", mean set size "
              << a.mean_size << "\n";
    return 0;
}

int cmd_uncertainty(const GlobalOpts& g, const std::string& passes_path,
                    const std::string& labels_path) {
    auto passes = uqkit::load_pass_tensor(passes_path);
    auto labels = uqkit::load_labels_csv(labels_path);
    labels.check_against(passes.n_samples(), passes.n_classes());

    auto table = uqkit::uncertainty_table(passes);
    auto mean = uqkit::mean_prediction(passes);
    std::vector<double> entropy(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        entropy[i] = table.rows[i].predictive_entropy;

    uqkit::atomic_write(out_path(g, "uncertainty.csv"),
                        uqkit::uncertainty_table_csv(table, labels));
    uqkit::write_json(
        out_path(g, "uncertainty_summary.json"),
        uqkit::class_summary_json(uqkit::entropy_by_correctness(entropy, mean, labels)));
    uqkit::atomic_write(out_path(g, "confidence_profile.csv"),
                        uqkit::confidence_profile_csv(uqkit::confidence_profile(passes)));
    uqkit::atomic_write(
        out_path(g, "classwise_entropy.csv"),
        uqkit::classwise_entropy_csv(uqkit::classwise_entropy_distribution(entropy, labels)));
    std::cout << "wrote uncertainty tables for " << passes.n_samples() << " samples\n";
    return 0;
}

int cmd_ece(const GlobalOpts& g, const std::string& probs_path, const std::string& labels_path,
            std::size_t bins) {
    auto probs = uqkit::load_prob_matrix(probs_path);
    auto labels = uqkit::load_labels_csv(labels_path);
    auto rel = uqkit::ece(probs, labels, bins);
    uqkit::write_json(out_path(g, "ece.json"),
                      json{{"ece", rel.ece},
                           {"bins", bins},
                           {"accuracy", uqkit::accuracy(probs, labels)}});
    uqkit::atomic_write(out_path(g, "reliability.csv"), uqkit::reliability_csv(rel));
    std::cout << "ece " << rel.ece << "\n";
    return 0;
}

int cmd_sparsity(const GlobalOpts& g, const std::string& weights_path,
                 const std::vector<double>& boundaries, std::optional<double> kappa) {
    auto weights = uqkit::load_weight_vector(weights_path);
    auto profile = uqkit::sparsity_profile(
        weights, boundaries.empty() ? uqkit::kDefaultSparsityBoundaries : boundaries);
    uqkit::atomic_write(out_path(g, "sparsity.csv"), uqkit::sparsity_profile_csv(profile));
    json j = uqkit::sparsity_profile_json(profile);
    if (kappa) {
        auto r = uqkit::threshold_for_target_sparsity(weights, *kappa);
        j["target"] = {{"kappa", *kappa}, {"threshold", r.threshold}, {"achieved", r.achieved}};
    }
    uqkit::write_json(out_path(g, "sparsity.json"), j);
    std::cout << "profiled " << profile.total << " weights\n";
    return 0;
}

// End-to-end pipeline: split -> train -> conformal on held-out calibration
// probabilities -> MC passes on the test slice -> joint comparison report.
int cmd_report(const GlobalOpts& g, const TrainOpts& t, const BlobOpts& b, double alpha,
               std::size_t passes, std::size_t ece_bins, double train_ratio, double cal_ratio,
               double test_ratio) {
    auto data = load_dataset(t, b, g.seed);
    auto split = uqkit::split_dataset(data.n, train_ratio, cal_ratio, test_ratio,
                                      uqkit::counter_hash(g.seed, 0x59717));
    auto [train_x, train_y] = uqkit::take_rows(data, split.train_idx);
    auto [cal_x, cal_y] = uqkit::take_rows(data, split.cal_idx);
    auto [test_x, test_y] = uqkit::take_rows(data, split.test_idx);

    std::size_t n_classes = 0;
    for (std::size_t i = 0; i < data.labels.size(); ++i)
        n_classes = std::max(n_classes, data.labels.at(i) + 1);
    std::vector<std::size_t> dims;
    dims.push_back(data.dim);
    dims.insert(dims.end(), t.hidden.begin(), t.hidden.end());
    dims.push_back(std::max<std::size_t>(n_classes, 2));

    uqkit::MiniNet net(dims, t.dropout, uqkit::counter_hash(g.seed, 0x1417));
    uqkit::TrainConfig cfg{t.epochs, t.batch_size, t.learning_rate,
                           uqkit::counter_hash(g.seed, 0x7a41)};
    net.train(train_x, split.train_idx.size(), train_y, cfg);
    save_checkpoint(g, net, "checkpoint");

    // Conformal side: deterministic (dropout-off) probabilities.
    auto cal_probs = net.forward(cal_x, split.cal_idx.size());
    auto test_probs = net.forward(test_x, split.test_idx.size());
    auto a = run_conformal(cal_probs, cal_y, test_probs, test_y, alpha, true);

    // Bayesian side: MC passes over the same test slice.
    auto tensor = net.mc_forward(test_x, split.test_idx.size(), passes,
                                 uqkit::counter_hash(g.seed, 0x3c9));
    uqkit::save_pass_tensor(out_path(g, "passes.uqtk"), tensor);
    auto table = uqkit::uncertainty_table(tensor);
    auto mean = uqkit::mean_prediction(tensor);
    std::vector<double> entropy(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        entropy[i] = table.rows[i].predictive_entropy;

    auto records = uqkit::join(a.sets, table, test_y);
    std::vector<double> sizes(records.size()), entropies(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        sizes[i] = static_cast<double>(records[i].set_size);
        entropies[i] = records[i].predictive_entropy;
    }
    auto rho = uqkit::spearman_rho(sizes, entropies);
    auto rel = uqkit::ece(mean, test_y, ece_bins);
    auto cm = uqkit::confusion_matrix(mean, test_y);
    auto profile = uqkit::sparsity_profile(net.export_weights());

    uqkit::RunManifest manifest;
    manifest.command = "report";
    manifest.inputs = {t.data};
    manifest.seed = g.seed;
    manifest.alpha = alpha;
    manifest.n_passes = passes;
    manifest.ece_bins = ece_bins;
    manifest.out_dir = g.out_dir;

    json report = {
        {"conformal", uqkit::conformal_report_json(a.q, a.coverage, a.mean_size, a.hist, manifest)},
        {"bayesian",
         {{"mean_predictive_entropy",
           [&] {
               double s = 0.0;
               for (double h : entropy) s += h;
               return s / static_cast<double>(entropy.size());
           }()},
          {"ece", rel.ece},
          {"accuracy", uqkit::accuracy(mean, test_y)}}},
        {"comparison",
         {{"spearman_rho", rho ? json(*rho) : json(nullptr)},
          {"n_test", records.size()}}},
        {"confusion_matrix", uqkit::confusion_json(cm)},
        {"sparsity", uqkit::sparsity_profile_json(profile)},
        {"manifest", manifest.to_json()}};
    uqkit::write_json(out_path(g, "report.json"), report);

    uqkit::atomic_write(out_path(g, "joint.csv"), uqkit::joint_records_csv(records));
    uqkit::atomic_write(out_path(g, "uncertainty.csv"),
                        uqkit::uncertainty_table_csv(table, test_y));
    uqkit::atomic_write(out_path(g, "reliability.csv"), uqkit::reliability_csv(rel));
    uqkit::atomic_write(out_path(g, "set_size_histogram.csv"),
                        uqkit::set_size_histogram_csv(a.hist));
    uqkit::atomic_write(out_path(g, "sparsity.csv"), uqkit::sparsity_profile_csv(profile));
    std::cout << "coverage " << a.coverage << ", mean set size " << a.mean_size << ", ece "
              << rel.ece << "\n";
    return 0;
}

int cmd_idx_convert(const GlobalOpts& g, const std::string& images_path,
                    const std::string& labels_path) {
    if (!images_path.empty()) {
        auto img = uqkit::load_idx_images(images_path);
        uqkit::save_tensor(out_path(g, "images.uqtk"), {img.n, img.dim}, img.values);
        std::cout << "converted " << img.n << " images\n";
    }
    if (!labels_path.empty()) {
        auto labels = uqkit::load_idx_labels(labels_path);
        uqkit::save_labels_csv(out_path(g, "labels.csv"), labels);
        std::cout << "converted " << labels.size() << " labels\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uqkit: conformal + MC-dropout uncertainty toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "base seed for all randomness");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--format", g.format, "preferred report format")
        ->check(CLI::IsMember({"json", "csv"}));

    // UQKIT_THREADS caps internal parallelism (0 = auto). Execution is
    // currently sequential; the variable is validated for forward
    // compatibility.
    if (const char* tv = std::getenv("UQKIT_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(tv, &end, 10);
        if (end == tv || *end != '\0' || v < 0) {
            std::cerr << "invalid UQKIT_THREADS value: " << tv << "\n";
            return 2;
        }
    }

    TrainOpts t;
    BlobOpts b;
    double alpha = 0.05;
    std::size_t passes = 50;
    std::size_t ece_bins = 15;
    std::size_t score_bins = 20;
    bool force_argmax = true;
    double train_ratio = 6.0 / 11.0, cal_ratio = 1.0 / 11.0, test_ratio = 4.0 / 11.0;

    auto add_data_opts = [&](CLI::App* cmd) {
        cmd->add_option("--data", t.data, "dataset: 'blobs' or a rank-2 UQTK file");
        cmd->add_option("--labels", t.labels_path, "labels CSV (for file datasets)");
        cmd->add_option("--blob-samples", b.samples, "synthetic sample count");
        cmd->add_option("--blob-classes", b.classes, "synthetic class count");
        cmd->add_option("--blob-dim", b.dim, "synthetic feature dimension");
        cmd->add_option("--blob-distance", b.distance, "distance between blob centers");
        cmd->add_option("--blob-sigma", b.sigma, "blob standard deviation");
    };
    auto add_train_opts = [&](CLI::App* cmd) {
        cmd->add_option("--hidden", t.hidden, "hidden layer widths");
        cmd->add_option("--dropout", t.dropout, "dropout rate on hidden layers");
        cmd->add_option("--epochs", t.epochs, "training epochs");
        cmd->add_option("--batch-size", t.batch_size, "mini-batch size");
        cmd->add_option("--lr", t.learning_rate, "learning rate");
    };

    auto* train = app.add_subcommand("train", "train the built-in classifier");
    add_data_opts(train);
    add_train_opts(train);

    auto* mcpass = app.add_subcommand("mcpass", "run stochastic forward passes");
    std::string checkpoint = "checkpoint", data_path, probs_path, weights_path;
    std::string cal_probs_path, cal_labels_path, test_probs_path, test_labels_path;
    std::string idx_images, idx_labels;
    mcpass->add_option("--checkpoint", checkpoint, "checkpoint path stem (.uqtk/.json)");
    mcpass->add_option("--data", data_path, "rank-2 UQTK feature file")->required();
    mcpass->add_option("--passes,-T", passes, "number of stochastic passes");

    auto* conformal = app.add_subcommand("conformal", "calibrate and evaluate prediction sets");
    conformal->add_option("--cal-probs", cal_probs_path)->required();
    conformal->add_option("--cal-labels", cal_labels_path)->required();
    conformal->add_option("--test-probs", test_probs_path)->required();
    conformal->add_option("--test-labels", test_labels_path)->required();
    conformal->add_option("--alpha", alpha, "significance level");
    conformal->add_flag("--force-argmax,!--no-force-argmax", force_argmax,
                        "force argmax class into every set");
    conformal->add_option("--score-bins", score_bins, "score histogram bins");

    auto* uncertainty = app.add_subcommand("uncertainty", "decompose MC-dropout uncertainty");
    std::string passes_path, labels_csv;
    uncertainty->add_option("--passes-file", passes_path, "rank-3 UQTK pass tensor")->required();
    uncertainty->add_option("--labels", labels_csv, "labels CSV")->required();

    auto* ece_cmd = app.add_subcommand("ece", "expected calibration error");
    ece_cmd->add_option("--probs", probs_path)->required();
    ece_cmd->add_option("--labels", labels_csv)->required();
    ece_cmd->add_option("--bins,-M", ece_bins, "reliability bin count");

    auto* sparsity = app.add_subcommand("sparsity", "weight-magnitude sparsity profile");
    std::vector<double> boundaries;
    std::optional<double> kappa;
    double kappa_value = -1.0;
    sparsity->add_option("--weights", weights_path)->required();
    sparsity->add_option("--boundaries", boundaries, "ascending magnitude boundaries");
    sparsity->add_option("--kappa", kappa_value, "target sparsity for threshold search");

    auto* report = app.add_subcommand("report", "end-to-end pipeline with combined report");
    add_data_opts(report);
    add_train_opts(report);
    report->add_option("--alpha", alpha, "significance level");
    report->add_option("--passes,-T", passes, "number of stochastic passes");
    report->add_option("--ece-bins", ece_bins, "reliability bin count");
    report->add_option("--train-ratio", train_ratio);
    report->add_option("--cal-ratio", cal_ratio);
    report->add_option("--test-ratio", test_ratio);

    auto* idx = app.add_subcommand("idx-convert", "convert IDX files to UQTK/CSV");
    idx->add_option("--images", idx_images, "IDX image file");
    idx->add_option("--labels", idx_labels, "IDX label file");

    // Let global options (--seed, --out-dir, --format) appear after the
    // subcommand name.
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*train) return cmd_train(g, t, b);
        if (*mcpass) return cmd_mcpass(g, checkpoint, data_path, passes);
        if (*conformal)
            return cmd_conformal(g, cal_probs_path, cal_labels_path, test_probs_path,
                                 test_labels_path, alpha, force_argmax, score_bins);
        if (*uncertainty) return cmd_uncertainty(g, passes_path, labels_csv);
        if (*ece_cmd) return cmd_ece(g, probs_path, labels_csv, ece_bins);
        if (*sparsity) {
            if (sparsity->count("--kappa") > 0) kappa = kappa_value;
            return cmd_sparsity(g, weights_path, boundaries, kappa);
        }
        if (*report)
            return cmd_report(g, t, b, alpha, passes, ece_bins, train_ratio, cal_ratio,
                              test_ratio);
        if (*idx) {
            if (idx_images.empty() && idx_labels.empty()) {
                std::cerr << "idx-convert: give --images and/or --labels\n";
                return 2;
            }
            return cmd_idx_convert(g, idx_images, idx_labels);
        }
    } catch (const uqkit::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
