#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "drmea/bound.hpp"
#include "drmea/data.hpp"
#include "drmea/model.hpp"
#include "drmea/numerics.hpp"
#include "drmea/rng.hpp"
#include "drmea/svg.hpp"
#include "drmea/trainer.hpp"

namespace {

using drmea::Dataset;
using json = nlohmann::ordered_json;

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<double> parse_shift(const std::string& text) {
    std::vector<double> shift;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            shift.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw drmea::ConfigError("bad --shift component '" + tok + "'");
        }
    }
    if (shift.empty()) shift.push_back(0.0);
    return shift;
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw drmea::IoError("cannot create directory: " + path);
}

int cmd_gen_data(int classes, int dim, int n_source, int n_target, double rotation,
                 const std::string& shift_text, double noise, std::uint64_t seed,
                 const std::string& out_dir) {
    drmea::GeneratorParams params;
    params.classes = classes;
    params.dim = dim;
    params.n_per_class_source = n_source;
    params.n_per_class_target = n_target;
    params.rotation_degrees = rotation;
    params.shift = parse_shift(shift_text);
    params.noise_sigma = noise;
    params.seed = seed;

    ensure_dir(out_dir);
    drmea::GeneratedPair pair = drmea::gen_rotated_gaussians(params);
    drmea::save_csv(pair.source, out_dir + "/source.csv", true);
    drmea::save_csv(pair.target, out_dir + "/target.csv", false);
    drmea::save_labels_csv(pair.target_labels, out_dir + "/target_labels.csv");

    json gen_params;
    gen_params["classes"] = params.classes;
    gen_params["dim"] = params.dim;
    gen_params["n_per_class_source"] = params.n_per_class_source;
    gen_params["n_per_class_target"] = params.n_per_class_target;
    gen_params["rotation_degrees"] = params.rotation_degrees;
    gen_params["shift"] = params.shift;
    gen_params["noise_sigma"] = params.noise_sigma;
    gen_params["rng"] = drmea::Rng::kAlgorithm;

    std::ostringstream meta;
    for (const char* tag : {"source", "target"}) {
        const bool is_source = std::string(tag) == "source";
        json line;
        line["n"] = is_source ? pair.source.size() : pair.target.size();
        line["d"] = params.dim;
        line["c"] = params.classes;
        line["domain_tag"] = tag;
        line["seed"] = params.seed;
        line["generator_params"] = gen_params;
        meta << line.dump() << '\n';
    }
    drmea::write_text_file(out_dir + "/metadata.jsonl", meta.str());
    std::cout << "wrote " << out_dir << "/{source.csv,target.csv,target_labels.csv,metadata.jsonl}\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& data_dir,
              const std::string& source_csv, const std::string& target_csv,
              const std::string& target_labels_csv, const std::string& out_dir,
              const std::string& ablation) {
    drmea::RunConfig config;
    if (!config_path.empty()) config = drmea::load_config_file(config_path);
    if (!ablation.empty()) config.ablation = ablation;

    std::string src = source_csv, tgt = target_csv, tgt_labels = target_labels_csv;
    if (!data_dir.empty()) {
        if (src.empty()) src = data_dir + "/source.csv";
        if (tgt.empty()) tgt = data_dir + "/target.csv";
        if (tgt_labels.empty()) {
            const std::string candidate = data_dir + "/target_labels.csv";
            if (std::filesystem::exists(candidate)) tgt_labels = candidate;
        }
    }
    if (src.empty() || tgt.empty())
        throw drmea::ConfigError("train needs --data DIR or both --source and --target");

    Dataset source = drmea::load_csv(src, true);
    Dataset target = drmea::load_csv(tgt, false);
    target.class_count = source.class_count;
    if (!tgt_labels.empty()) {
        std::vector<int> labels = drmea::load_labels_csv(tgt_labels);
        if (labels.size() != target.size())
            throw drmea::DataError("target labels count does not match target samples");
        target.labels = std::move(labels);
    }

    drmea::TrainResult result = drmea::train(config, source, target, out_dir);
    const drmea::EpochLog& last = result.logs.back();
    std::cout << "run complete: epochs=" << result.logs.size() << " src_acc=" << last.src_acc
              << " tgt_acc=" << last.tgt_acc << " (logs in " << out_dir << ")\n";
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_csv,
             const std::string& labels_csv) {
    drmea::ManifoldNetwork net = drmea::load_model_file(model_path);
    Dataset data;
    std::vector<int> labels;
    if (labels_csv.empty()) {
        data = drmea::load_csv(data_csv, true);
        labels = *data.labels;
    } else {
        data = drmea::load_csv(data_csv, false);
        labels = drmea::load_labels_csv(labels_csv);
        if (labels.size() != data.size())
            throw drmea::DataError("label count does not match sample count");
    }
    const int c = net.dims.back();
    drmea::EvalResult eval = drmea::evaluate(net, data.features, labels, c);
    std::cout << "accuracy " << fmt17(eval.accuracy) << "\n";
    for (int cls = 0; cls < c; ++cls)
        std::cout << "class " << cls << " accuracy " << fmt17(eval.per_class[cls]) << "\n";
    std::cout << "mean class accuracy " << fmt17(eval.mean_class_accuracy) << "\n";
    return 0;
}

int cmd_analyze_dprime(const std::string& source_csv, const std::string& target_csv,
                       bool source_labeled, bool target_labeled, std::size_t batch_size,
                       int trials, double delta, std::uint64_t seed, const std::string& out_dir) {
    Dataset source = drmea::load_csv(source_csv, source_labeled);
    Dataset target = drmea::load_csv(target_csv, target_labeled);

    drmea::DprimeRecommendation rec =
        drmea::recommend_dprime(source.features, target.features, batch_size, trials, seed);

    ensure_dir(out_dir);
    std::ostringstream csv;
    csv << "d_prime,mean_error_index,mean_gap_s,mean_gap_t\n";
    for (const drmea::DprimeCurvePoint& pt : rec.curve)
        csv << pt.d_prime << ',' << fmt17(pt.mean_error_index) << ',' << fmt17(pt.mean_gap_s)
            << ',' << fmt17(pt.mean_gap_t) << '\n';
    drmea::write_text_file(out_dir + "/dprime_curve.csv", csv.str());

    // Bound scale at the recommendation: B from the observed max sample norm.
    double max_norm = 0.0;
    for (std::size_t j = 0; j < source.features.cols(); ++j)
        max_norm = std::max(max_norm, drmea::col_norm(source.features, j));
    for (std::size_t j = 0; j < target.features.cols(); ++j)
        max_norm = std::max(max_norm, drmea::col_norm(target.features, j));
    const double e_val = drmea::e_delta(max_norm, batch_size, delta);
    const double bound_at_best =
        2.0 * std::sqrt(2.0) * e_val *
        rec.curve[static_cast<std::size_t>(rec.best - 1)].mean_error_index;

    std::ostringstream summary;
    summary << "recommended_d_prime=" << rec.best << " mean_error_index="
            << fmt17(rec.curve[static_cast<std::size_t>(rec.best - 1)].mean_error_index)
            << " bound_at_recommendation=" << fmt17(bound_at_best) << " delta=" << fmt17(delta)
            << " B=" << fmt17(max_norm) << " batch_size=" << batch_size << " trials=" << trials
            << " seed=" << seed << "\n";
    drmea::write_text_file(out_dir + "/recommendation.txt", summary.str());

    std::vector<double> xs;
    drmea::SvgSeries curve{"mean e(d')", {}};
    for (const drmea::DprimeCurvePoint& pt : rec.curve) {
        xs.push_back(pt.d_prime);
        curve.y.push_back(std::isinf(pt.mean_error_index) ? std::nan("") : pt.mean_error_index);
    }
    const double marker = static_cast<double>(batch_size) - 1.0;
    drmea::write_text_file(out_dir + "/dprime_curve.svg",
                           drmea::svg_line_chart("error index vs d'", xs, {curve}, marker));

    std::cout << summary.str();
    return 0;
}

int cmd_report(const std::string& run_dir, const std::string& out_dir) {
    const std::string epochs_path = run_dir + "/epochs.csv";
    if (!std::filesystem::exists(epochs_path))
        throw drmea::IoError("missing epochs.csv in " + run_dir);
    std::vector<drmea::EpochLog> logs = drmea::read_epochs_csv(epochs_path);
    if (logs.empty()) throw drmea::IoError("epochs.csv has no data rows");

    std::string ablation = "unknown";
    {
        std::ifstream cfg(run_dir + "/config.resolved");
        std::string line;
        while (cfg && std::getline(cfg, line)) {
            if (line.rfind("ablation = ", 0) == 0) ablation = line.substr(11);
        }
    }

    ensure_dir(out_dir);
    std::vector<double> xs;
    drmea::SvgSeries ce{"ce", {}}, ds{"ds", {}}, al{"al", {}}, total{"total", {}};
    drmea::SvgSeries src{"src_acc", {}}, tgt{"tgt_acc", {}}, tgt_mean{"tgt_mean_class_acc", {}};
    int total_skips = 0;
    for (const drmea::EpochLog& log : logs) {
        xs.push_back(log.epoch);
        ce.y.push_back(log.mean.ce);
        ds.y.push_back(log.mean.ds);
        al.y.push_back(log.mean.al);
        total.y.push_back(log.mean.total);
        src.y.push_back(log.src_acc);
        tgt.y.push_back(log.tgt_acc);
        tgt_mean.y.push_back(log.tgt_mean_class_acc);
        total_skips += log.align_skips;
    }
    drmea::write_text_file(out_dir + "/losses.svg",
                           drmea::svg_line_chart("loss terms", xs, {ce, ds, al, total}));
    drmea::write_text_file(out_dir + "/accuracy.svg",
                           drmea::svg_line_chart("recognition rate", xs, {src, tgt, tgt_mean}));

    const drmea::EpochLog& last = logs.back();
    std::ostringstream summary;
    summary << "ablation=" << ablation << "\n"
            << "epochs=" << logs.size() << "\n"
            << "final_src_acc=" << fmt17(last.src_acc) << "\n"
            << "final_tgt_acc=" << fmt17(last.tgt_acc) << "\n"
            << "final_tgt_mean_class_acc=" << fmt17(last.tgt_mean_class_acc) << "\n"
            << "final_total_loss=" << fmt17(last.mean.total) << "\n"
            << "align_skips_total=" << total_skips << "\n";
    drmea::write_text_file(out_dir + "/summary.txt", summary.str());
    std::cout << summary.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DRMEA: discriminative manifold embedding and alignment toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a rotated-Gaussian domain pair");
    int classes = 3, dim = 16, n_source = 200, n_target = 200;
    double rotation = 45.0, noise = 1.0;
    std::string shift_text = "0";
    std::uint64_t gen_seed = 0;
    std::string gen_out = "data";
    gen->add_option("--classes", classes, "number of classes")->capture_default_str();
    gen->add_option("--dim", dim, "feature dimension")->capture_default_str();
    gen->add_option("--n-source", n_source, "source samples per class")->capture_default_str();
    gen->add_option("--n-target", n_target, "target samples per class")->capture_default_str();
    gen->add_option("--rotation", rotation, "target rotation in degrees")->capture_default_str();
    gen->add_option("--shift", shift_text, "target shift, comma-separated, zero-padded to dim")
        ->capture_default_str();
    gen->add_option("--noise", noise, "isotropic noise sigma")->capture_default_str();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", gen_out, "output directory")->capture_default_str();

    // train
    auto* train_cmd = app.add_subcommand("train", "train on a source/target pair");
    std::string config_path, data_dir, source_csv, target_csv, target_labels_csv;
    std::string run_out = "run";
    std::string ablation = "none";
    train_cmd->add_option("--config", config_path, "config file (key = value lines)")
        ->capture_default_str();
    train_cmd->add_option("--data", data_dir, "directory with the gen-data layout")
        ->capture_default_str();
    train_cmd->add_option("--source", source_csv, "labeled source CSV")->capture_default_str();
    train_cmd->add_option("--target", target_csv, "unlabeled target CSV")->capture_default_str();
    train_cmd->add_option("--target-labels", target_labels_csv, "held-out target labels CSV")
        ->capture_default_str();
    train_cmd->add_option("--out", run_out, "run directory")->capture_default_str();
    train_cmd
        ->add_option("--ablation", ablation, "one of none|no-ds|no-al|source-only")
        ->capture_default_str();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model");
    std::string model_path, eval_csv, eval_labels;
    eval_cmd->add_option("--model", model_path, "model file (DRMEA-MODEL v1)")
        ->required()
        ->capture_default_str();
    eval_cmd->add_option("--data", eval_csv, "feature CSV (labeled unless --labels given)")
        ->required()
        ->capture_default_str();
    eval_cmd->add_option("--labels", eval_labels, "separate labels CSV")->capture_default_str();

    // analyze-dprime
    auto* ana = app.add_subcommand("analyze-dprime", "error-index curve and d' recommendation");
    std::string ana_source, ana_target, ana_out = "analysis";
    std::size_t ana_batch = 32;
    int ana_trials = 20;
    double ana_delta = 0.05;
    std::uint64_t ana_seed = 0;
    bool ana_source_labeled = true, ana_target_labeled = false;
    ana->add_option("--source", ana_source, "source feature CSV")->required()->capture_default_str();
    ana->add_option("--target", ana_target, "target feature CSV")->required()->capture_default_str();
    ana->add_option("--source-labeled", ana_source_labeled,
                    "source CSV carries a trailing label column")
        ->capture_default_str();
    ana->add_option("--target-labeled", ana_target_labeled,
                    "target CSV carries a trailing label column")
        ->capture_default_str();
    ana->add_option("--batch-size", ana_batch, "batch size b_s")->capture_default_str();
    ana->add_option("--trials", ana_trials, "batch resamples to average")->capture_default_str();
    ana->add_option("--delta", ana_delta, "confidence parameter in (0,1)")->capture_default_str();
    ana->add_option("--seed", ana_seed, "RNG seed")->capture_default_str();
    ana->add_option("--out", ana_out, "output directory")->capture_default_str();

    // report
    auto* rep = app.add_subcommand("report", "render curves and a summary from a run directory");
    std::string rep_run, rep_out = "report";
    rep->add_option("--run", rep_run, "run directory with epochs.csv")
        ->required()
        ->capture_default_str();
    rep->add_option("--out", rep_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (gen->parsed())
            return cmd_gen_data(classes, dim, n_source, n_target, rotation, shift_text, noise,
                                gen_seed, gen_out);
        if (train_cmd->parsed())
            return cmd_train(config_path, data_dir, source_csv, target_csv, target_labels_csv,
                             run_out, ablation);
        if (eval_cmd->parsed()) return cmd_eval(model_path, eval_csv, eval_labels);
        if (ana->parsed())
            return cmd_analyze_dprime(ana_source, ana_target, ana_source_labeled,
                                      ana_target_labeled, ana_batch, ana_trials, ana_delta,
                                      ana_seed, ana_out);
        if (rep->parsed()) return cmd_report(rep_run, rep_out);
    } catch (const drmea::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const drmea::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const drmea::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const drmea::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitIo;
    } catch (const drmea::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const drmea::NumericError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
