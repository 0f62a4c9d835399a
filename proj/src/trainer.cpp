#include "drmea/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "drmea/rng.hpp"

namespace drmea {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

RunConfig resolve_config(RunConfig config) {
    if (config.dims.empty()) throw ConfigError("dims must name at least one hidden layer");
    for (int d : config.dims)
        if (d <= 0) throw ConfigError("dims entries must be positive");
    if (config.activations.size() != config.dims.size())
        throw ConfigError("need one activation per hidden layer");
    if (config.lambda1 < 0.0 || config.lambda2 < 0.0)
        throw ConfigError("lambda1 and lambda2 must be non-negative");
    if (config.k < 1) throw ConfigError("k must be at least 1");
    if (config.batch_size < 3) throw ConfigError("batch_size must be at least 3");
    if (config.epochs < 1) throw ConfigError("epochs must be positive");
    if (!(config.eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(config.gap_tol > 0.0)) throw ConfigError("gap_tol must be positive");
    if (!(config.lr > 0.0)) throw ConfigError("lr must be positive");

    if (config.d_prime <= 0) config.d_prime = static_cast<int>(config.batch_size) - 1;
    if (config.intra_start_epoch < 0)
        config.intra_start_epoch = (config.epochs < 30) ? config.epochs / 4 : 15;

    if (config.ablation == "none") {
        // keep as configured
    } else if (config.ablation == "no-ds") {
        config.lambda1 = 0.0;
        config.intra_start_epoch = config.epochs;  // never reached
    } else if (config.ablation == "no-al") {
        config.lambda2 = 0.0;
    } else if (config.ablation == "source-only") {
        config.lambda1 = 0.0;
        config.lambda2 = 0.0;
        config.intra_start_epoch = config.epochs;
    } else {
        throw ConfigError("unknown ablation '" + config.ablation +
                          "' (expected none|no-ds|no-al|source-only)");
    }
    return config;
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) throw ParseError("empty key or value", line_no);

        try {
            if (key == "dims") {
                config.dims.clear();
                for (const std::string& tok : split(value, ','))
                    config.dims.push_back(std::stoi(trim(tok)));
            } else if (key == "activations") {
                config.activations.clear();
                for (const std::string& tok : split(value, ','))
                    config.activations.push_back(parse_activation(trim(tok)));
            } else if (key == "lambda1") {
                config.lambda1 = std::stod(value);
            } else if (key == "lambda2") {
                config.lambda2 = std::stod(value);
            } else if (key == "k") {
                config.k = std::stoi(value);
            } else if (key == "d_prime") {
                config.d_prime = std::stoi(value);
            } else if (key == "optimizer") {
                if (value == "adam") {
                    config.optimizer = OptimizerKind::kAdam;
                } else if (value == "sgd") {
                    config.optimizer = OptimizerKind::kSgd;
                } else {
                    throw ConfigError("unknown optimizer '" + value + "'");
                }
            } else if (key == "lr") {
                config.lr = std::stod(value);
            } else if (key == "beta1") {
                config.beta1 = std::stod(value);
            } else if (key == "beta2") {
                config.beta2 = std::stod(value);
            } else if (key == "adam_eps") {
                config.adam_eps = std::stod(value);
            } else if (key == "momentum") {
                config.momentum = std::stod(value);
            } else if (key == "weight_decay") {
                config.weight_decay = std::stod(value);
            } else if (key == "sched_alpha") {
                config.sched_alpha = std::stod(value);
            } else if (key == "sched_beta") {
                config.sched_beta = std::stod(value);
            } else if (key == "batch_size") {
                config.batch_size = static_cast<std::size_t>(std::stoul(value));
            } else if (key == "epochs") {
                config.epochs = std::stoi(value);
            } else if (key == "intra_start_epoch") {
                config.intra_start_epoch = std::stoi(value);
            } else if (key == "seed") {
                config.seed = std::stoull(value);
            } else if (key == "eps") {
                config.eps = std::stod(value);
            } else if (key == "gap_tol") {
                config.gap_tol = std::stod(value);
            } else if (key == "anchor_max_samples") {
                config.anchor_max_samples = static_cast<std::size_t>(std::stoul(value));
            } else if (key == "ablation") {
                config.ablation = value;
            } else {
                throw ConfigError("unknown config key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ParseError("bad value for key '" + key + "'", line_no);
        }
    }
    return config;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string format_config(const RunConfig& config) {
    std::ostringstream out;
    out << "dims = ";
    for (std::size_t i = 0; i < config.dims.size(); ++i) out << (i ? "," : "") << config.dims[i];
    out << "\nactivations = ";
    for (std::size_t i = 0; i < config.activations.size(); ++i)
        out << (i ? "," : "") << format_activation(config.activations[i]);
    out << "\nlambda1 = " << format_double(config.lambda1);
    out << "\nlambda2 = " << format_double(config.lambda2);
    out << "\nk = " << config.k;
    out << "\nd_prime = " << config.d_prime;
    out << "\noptimizer = " << (config.optimizer == OptimizerKind::kAdam ? "adam" : "sgd");
    out << "\nlr = " << format_double(config.lr);
    out << "\nbeta1 = " << format_double(config.beta1);
    out << "\nbeta2 = " << format_double(config.beta2);
    out << "\nadam_eps = " << format_double(config.adam_eps);
    out << "\nmomentum = " << format_double(config.momentum);
    out << "\nweight_decay = " << format_double(config.weight_decay);
    out << "\nsched_alpha = " << format_double(config.sched_alpha);
    out << "\nsched_beta = " << format_double(config.sched_beta);
    out << "\nbatch_size = " << config.batch_size;
    out << "\nepochs = " << config.epochs;
    out << "\nintra_start_epoch = " << config.intra_start_epoch;
    out << "\nseed = " << config.seed;
    out << "\neps = " << format_double(config.eps);
    out << "\ngap_tol = " << format_double(config.gap_tol);
    out << "\nanchor_max_samples = " << config.anchor_max_samples;
    out << "\nablation = " << config.ablation;
    out << "\n";
    return out.str();
}

OptimizerState make_optimizer_state(const std::vector<Matrix*>& params) {
    OptimizerState state;
    for (const Matrix* p : params) {
        state.m.emplace_back(p->rows(), p->cols());
        state.v.emplace_back(p->rows(), p->cols());
    }
    state.t = 0;
    return state;
}

void adam_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
               OptimizerState& state, double lr, double beta1, double beta2, double eps_opt) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw UsageError("adam_step: parameter/gradient/state size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& theta = *params[p];
        const Matrix& g = grads[p];
        if (!theta.same_shape(g)) throw UsageError("adam_step: gradient shape mismatch");
        Matrix& m = state.m[p];
        Matrix& v = state.v[p];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            const double gi = g.data()[i];
            m.data()[i] = beta1 * m.data()[i] + (1.0 - beta1) * gi;
            v.data()[i] = beta2 * v.data()[i] + (1.0 - beta2) * gi * gi;
            const double m_hat = m.data()[i] / bc1;
            const double v_hat = v.data()[i] / bc2;
            theta.data()[i] -= lr * m_hat / (std::sqrt(v_hat) + eps_opt);
        }
    }
}

void sgd_momentum_step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads,
                       OptimizerState& state, double lr0, double momentum, double weight_decay,
                       double sched_alpha, double sched_beta, double progress) {
    if (params.size() != grads.size() || params.size() != state.v.size())
        throw UsageError("sgd_step: parameter/gradient/state size mismatch");
    if (progress < 0.0 || progress > 1.0) throw UsageError("sgd_step: progress must be in [0, 1]");
    state.t += 1;
    const double lr_eff = lr0 / std::pow(1.0 + sched_alpha * progress, sched_beta);
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& theta = *params[p];
        const Matrix& g = grads[p];
        if (!theta.same_shape(g)) throw UsageError("sgd_step: gradient shape mismatch");
        Matrix& vel = state.v[p];
        for (std::size_t i = 0; i < theta.size(); ++i) {
            vel.data()[i] = momentum * vel.data()[i] -
                            lr_eff * (g.data()[i] + weight_decay * theta.data()[i]);
            theta.data()[i] += vel.data()[i];
        }
    }
}

EvalResult evaluate(const ManifoldNetwork& net, const Matrix& features,
                    const std::vector<int>& labels, int class_count) {
    if (labels.size() != features.cols()) throw UsageError("evaluate: one label per column required");
    if (class_count < 1) throw UsageError("evaluate: class_count must be positive");
    ForwardPass pass = forward(net, features);
    std::vector<std::size_t> correct(static_cast<std::size_t>(class_count), 0);
    std::vector<std::size_t> totals(static_cast<std::size_t>(class_count), 0);
    std::size_t hits = 0;
    for (std::size_t j = 0; j < features.cols(); ++j) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < pass.logits.rows(); ++i)
            if (pass.logits(i, j) > pass.logits(arg, j)) arg = i;
        const int lab = labels[j];
        if (lab < 0 || lab >= class_count) throw DataError("evaluate: label out of range");
        ++totals[static_cast<std::size_t>(lab)];
        if (arg == static_cast<std::size_t>(lab)) {
            ++hits;
            ++correct[static_cast<std::size_t>(lab)];
        }
    }
    EvalResult out;
    out.accuracy = static_cast<double>(hits) / static_cast<double>(features.cols());
    double mean_acc = 0.0;
    int seen = 0;
    for (int cls = 0; cls < class_count; ++cls) {
        const std::size_t tot = totals[static_cast<std::size_t>(cls)];
        const double acc =
            tot ? static_cast<double>(correct[static_cast<std::size_t>(cls)]) / static_cast<double>(tot)
                : 0.0;
        out.per_class.push_back(acc);
        if (tot) {
            mean_acc += acc;
            ++seen;
        }
    }
    out.mean_class_accuracy = seen ? mean_acc / static_cast<double>(seen) : 0.0;
    return out;
}

EvalResult evaluate(const ManifoldNetwork& net, const Dataset& dataset) {
    if (!dataset.labels) throw UsageError("evaluate: dataset has no labels");
    return evaluate(net, dataset.features, *dataset.labels, dataset.class_count);
}

namespace {

Matrix gather_columns(const Matrix& m, const std::vector<int>& idx) {
    Matrix out(m.rows(), idx.size());
    for (std::size_t j = 0; j < idx.size(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i)
            out(i, j) = m(i, static_cast<std::size_t>(idx[j]));
    return out;
}

void dump_breakdown(std::ostream& out, int epoch, std::size_t batch, const LossBreakdown& b) {
    out << "non-finite objective at epoch " << epoch << " batch " << batch << "\n"
        << "  ce    = " << b.ce << "\n";
    for (std::size_t l = 0; l < b.inter.size(); ++l) out << "  inter[" << l << "] = " << b.inter[l] << "\n";
    for (std::size_t l = 0; l < b.intra.size(); ++l) out << "  intra[" << l << "] = " << b.intra[l] << "\n";
    for (std::size_t l = 0; l < b.align.size(); ++l) out << "  align[" << l << "] = " << b.align[l] << "\n";
    out << "  ds = " << b.ds << "  al = " << b.al << "  total = " << b.total << "\n";
}

}  // namespace

void write_epochs_csv(const std::vector<EpochLog>& logs, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open epochs CSV for writing: " + path);
    out << "epoch,ce,inter,intra,align,ds,al,total,src_acc,tgt_acc,tgt_mean_class_acc,align_skips\n";
    for (const EpochLog& log : logs) {
        double inter = 0.0, intra = 0.0, align = 0.0;
        for (double v : log.mean.inter) inter += v;
        for (double v : log.mean.intra) intra += v;
        for (double v : log.mean.align) align += v;
        out << log.epoch << ',' << format_double(log.mean.ce) << ',' << format_double(inter) << ','
            << format_double(intra) << ',' << format_double(align) << ','
            << format_double(log.mean.ds) << ',' << format_double(log.mean.al) << ','
            << format_double(log.mean.total) << ',' << format_double(log.src_acc) << ','
            << format_double(log.tgt_acc) << ',' << format_double(log.tgt_mean_class_acc) << ','
            << log.align_skips << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<EpochLog> read_epochs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open epochs CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty epochs CSV", 1);
    std::vector<EpochLog> logs;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f = split(line, ',');
        if (f.size() != 12) throw ParseError("expected 12 columns", line_no);
        EpochLog log;
        try {
            log.epoch = std::stoi(f[0]);
            log.mean.ce = std::stod(f[1]);
            log.mean.inter = {std::stod(f[2])};
            log.mean.intra = {std::stod(f[3])};
            log.mean.align = {std::stod(f[4])};
            log.mean.ds = std::stod(f[5]);
            log.mean.al = std::stod(f[6]);
            log.mean.total = std::stod(f[7]);
            log.src_acc = std::stod(f[8]);
            log.tgt_acc = std::stod(f[9]);
            log.tgt_mean_class_acc = std::stod(f[10]);
            log.align_skips = std::stoi(f[11]);
        } catch (const std::exception&) {
            throw ParseError("bad epochs CSV row", line_no);
        }
        logs.push_back(std::move(log));
    }
    return logs;
}

TrainResult train(const RunConfig& raw_config, const Dataset& source, const Dataset& target,
                  const std::string& run_dir) {
    RunConfig config = resolve_config(raw_config);
    if (!source.labels) throw DataError("train: source dataset must be labeled");
    if (source.class_count < 2) throw DataError("train: need at least 2 classes");
    if (source.dim() != target.dim()) throw DataError("train: domain feature dimensions differ");
    if (config.batch_size < static_cast<std::size_t>(source.class_count))
        throw ConfigError("train: batch_size must be >= class count");
    if (config.k > source.class_count)
        throw ConfigError("train: top-k " + std::to_string(config.k) + " exceeds class count " +
                          std::to_string(source.class_count));

    const bool to_disk = !run_dir.empty();
    namespace fs = std::filesystem;
    if (to_disk) {
        std::error_code ec;
        fs::create_directories(run_dir, ec);
        if (ec) throw IoError("cannot create run directory: " + run_dir);
        std::ofstream cfg(run_dir + "/config.resolved", std::ios::trunc);
        if (!cfg) throw IoError("cannot write config.resolved");
        cfg << "# rng = " << Rng::kAlgorithm << "\n" << format_config(config);
    }

    const int c = source.class_count;
    std::vector<int> dims;
    dims.push_back(static_cast<int>(source.dim()));
    for (int d : config.dims) dims.push_back(d);
    dims.push_back(c);

    ManifoldNetwork net = init_network(dims, config.activations, config.seed);
    std::vector<Matrix*> params = parameter_ptrs(net);
    OptimizerState opt_state = make_optimizer_state(params);

    BatchPlan plan = make_batch_plan(source, target, config.batch_size, config.epochs, config.seed);
    const std::size_t batches_per_epoch = plan.source_batches.front().size();
    const long total_steps = static_cast<long>(batches_per_epoch) * config.epochs;

    TrainResult result;
    AnchorStore anchors =
        compute_anchors(net, source, config.batch_size, config.anchor_max_samples);
    result.anchor_refreshes = 1;
    if (to_disk) save_anchors_csv(anchors, run_dir + "/anchors_epoch_0.csv");

    const std::size_t n_layers = net.layers.size();
    long step = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        LossBreakdown epoch_sum;
        epoch_sum.inter.assign(n_layers, 0.0);
        epoch_sum.intra.assign(n_layers, 0.0);
        epoch_sum.align.assign(n_layers, 0.0);
        int skips = 0;

        for (std::size_t b = 0; b < batches_per_epoch; ++b, ++step) {
            const std::vector<int>& src_idx = plan.source_batches[epoch][b];
            const std::vector<int>& tgt_idx = plan.target_batches[epoch][b];
            Matrix xs = gather_columns(source.features, src_idx);
            Matrix xt = gather_columns(target.features, tgt_idx);
            std::vector<int> batch_labels(src_idx.size());
            for (std::size_t j = 0; j < src_idx.size(); ++j)
                batch_labels[j] = (*source.labels)[static_cast<std::size_t>(src_idx[j])];

            std::vector<double> inter_vals(n_layers, 0.0), intra_vals(n_layers, 0.0),
                align_vals(n_layers, 0.0);
            LossBreakdown breakdown;
            try {
                Tape tape;
                NetworkNodes net_nodes = network_inputs(tape, net);
                ForwardNodes fwd_s = forward_nodes(tape, net, net_nodes, tape.input(xs));
                ForwardNodes fwd_t = forward_nodes(tape, net, net_nodes, tape.input(xt));

                NodeId ce_node = tape.cross_entropy_from_logits(fwd_s.logits, batch_labels);
                NodeId root = ce_node;

                const bool intra_active = epoch >= config.intra_start_epoch;
                if (config.lambda1 > 0.0) {
                    NodeId ds_node = -1;
                    // Soft labels detach here: the loss sees current values only.
                    Matrix soft_labels = tape.value(fwd_t.probs);
                    for (std::size_t l = 0; l < n_layers; ++l) {
                        NodeId inter_l = inter_class_loss_node(
                            tape, fwd_s.h[l], batch_labels, c, anchors.layers[l].total_mean,
                            config.eps);
                        inter_vals[l] = tape.value(inter_l)(0, 0);
                        NodeId term = inter_l;
                        if (intra_active) {
                            NodeId intra_l = intra_class_loss_node(
                                tape, fwd_t.h[l], soft_labels, anchors.layers[l].class_means,
                                config.k, config.eps);
                            intra_vals[l] = tape.value(intra_l)(0, 0);
                            term = tape.add(inter_l, intra_l);
                        }
                        ds_node = (ds_node < 0) ? term : tape.add(ds_node, term);
                    }
                    root = tape.add(root, tape.scale(ds_node, config.lambda1));
                }

                if (config.lambda2 > 0.0) {
                    try {
                        NodeId al_node = -1;
                        std::vector<double> trial_vals(n_layers, 0.0);
                        for (std::size_t l = 0; l < n_layers; ++l) {
                            const int d_l = dims[l + 1];
                            const int dp = std::min(
                                {config.d_prime, d_l, static_cast<int>(config.batch_size) - 1});
                            NodeId align_l = alignment_loss_node(tape, fwd_s.h[l], fwd_t.h[l], dp,
                                                                 config.gap_tol);
                            trial_vals[l] = tape.value(align_l)(0, 0);
                            al_node = (al_node < 0) ? align_l : tape.add(al_node, align_l);
                        }
                        align_vals = trial_vals;
                        root = tape.add(root, tape.scale(al_node, config.lambda2));
                    } catch (const DegenerateSpectrumError&) {
                        ++skips;  // drop the alignment term for this batch only
                    }
                }

                breakdown = total_objective(tape.value(ce_node)(0, 0), inter_vals, intra_vals,
                                            align_vals, config.lambda1, config.lambda2);

                auto grads = tape.backward(root);
                std::vector<Matrix> param_grads;
                param_grads.reserve(params.size());
                for (std::size_t p = 0; p < params.size(); ++p) {
                    auto it = grads.find(net_nodes.params[p]);
                    param_grads.push_back(it != grads.end()
                                              ? it->second
                                              : Matrix(params[p]->rows(), params[p]->cols()));
                }

                if (config.optimizer == OptimizerKind::kAdam) {
                    adam_step(params, param_grads, opt_state, config.lr, config.beta1,
                              config.beta2, config.adam_eps);
                } else {
                    const double progress =
                        (total_steps > 1)
                            ? static_cast<double>(step) / static_cast<double>(total_steps - 1)
                            : 0.0;
                    sgd_momentum_step(params, param_grads, opt_state, config.lr, config.momentum,
                                      config.weight_decay, config.sched_alpha, config.sched_beta,
                                      progress);
                }
            } catch (const NumericError& e) {
                LossBreakdown partial = total_objective(breakdown.ce, inter_vals, intra_vals,
                                                        align_vals, config.lambda1, config.lambda2);
                dump_breakdown(std::cerr, epoch, b, partial);
                throw NumericError(std::string("training aborted: ") + e.what());
            }

            epoch_sum.ce += breakdown.ce;
            for (std::size_t l = 0; l < n_layers; ++l) {
                epoch_sum.inter[l] += breakdown.inter[l];
                epoch_sum.intra[l] += breakdown.intra[l];
                epoch_sum.align[l] += breakdown.align[l];
            }
            epoch_sum.ds += breakdown.ds;
            epoch_sum.al += breakdown.al;
            epoch_sum.total += breakdown.total;
        }

        EpochLog log;
        log.epoch = epoch;
        const double inv = 1.0 / static_cast<double>(batches_per_epoch);
        log.mean.ce = epoch_sum.ce * inv;
        for (std::size_t l = 0; l < n_layers; ++l) {
            log.mean.inter.push_back(epoch_sum.inter[l] * inv);
            log.mean.intra.push_back(epoch_sum.intra[l] * inv);
            log.mean.align.push_back(epoch_sum.align[l] * inv);
        }
        log.mean.ds = epoch_sum.ds * inv;
        log.mean.al = epoch_sum.al * inv;
        log.mean.total = epoch_sum.total * inv;
        log.align_skips = skips;

        EvalResult src_eval = evaluate(net, source.features, *source.labels, c);
        log.src_acc = src_eval.accuracy;
        if (target.labels) {
            EvalResult tgt_eval = evaluate(net, target.features, *target.labels, c);
            log.tgt_acc = tgt_eval.accuracy;
            log.tgt_per_class = tgt_eval.per_class;
            log.tgt_mean_class_acc = tgt_eval.mean_class_accuracy;
        } else {
            log.tgt_acc = std::nan("");
            log.tgt_mean_class_acc = std::nan("");
        }
        result.logs.push_back(std::move(log));

        anchors = refresh(anchors, net, source, config.batch_size, epoch + 1,
                          config.anchor_max_samples);
        result.anchor_refreshes += 1;
        if (to_disk)
            save_anchors_csv(anchors, run_dir + "/anchors_epoch_" + std::to_string(epoch + 1) + ".csv");
    }

    if (to_disk) {
        write_epochs_csv(result.logs, run_dir + "/epochs.csv");
        save_model_file(net, run_dir + "/model_final");
    }
    result.net = std::move(net);
    return result;
}

}  // namespace drmea
