// axrx command-line front end.
//
// Every option takes a value and the last occurrence wins. A --config JSON
// object is appended after the command line, so its entries override flags.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "axrx/attacks.hpp"
#include "axrx/binary_io.hpp"
#include "axrx/data.hpp"
#include "axrx/defenses.hpp"
#include "axrx/experiments.hpp"
#include "axrx/metrics.hpp"
#include "axrx/models.hpp"
#include "axrx/report.hpp"
#include "axrx/train.hpp"

namespace fs = std::filesystem;
using namespace axrx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitRuntime = 3;

template <typename T>
std::vector<T> parse_list(const std::string& text, const char* what) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !is.eof()) throw PlanError(std::string("invalid ") + what + " entry \"" + item + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw PlanError(std::string("empty ") + what);
    return out;
}

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---- option groups -------------------------------------------------------

struct DataOptions {
    std::string path;
    std::string split = "test";
    std::uint64_t split_seed = 17;

    void add(CLI::App& app, bool need_split = true) {
        app.add_option("--data", path, "AXDS dataset file")->required();
        if (need_split) app.add_option("--split", split, "train | val | test | all");
        app.add_option("--split-seed", split_seed, "seed of the 70/15/15 split");
    }

    Dataset load_resolved() const {
        if (!fs::exists(path)) throw PlanError("dataset \"" + path + "\" does not exist");
        const Dataset raw = read_dataset(path);
        return resolve_labels(raw, LabelPolicy::standard(raw.label_names));
    }

    DatasetSplits load_splits() const { return split_dataset(load_resolved(), split_seed); }

    Dataset load() const {
        const Dataset d = load_resolved();
        if (split == "all") return d;
        DatasetSplits s = split_dataset(d, split_seed);
        if (split == "train") return s.train;
        if (split == "val") return s.val;
        if (split == "test") return s.test;
        throw PlanError("unknown split \"" + split + "\" (expected train, val, test or all)");
    }
};

struct AttackOptionsCli {
    std::string method = "pgd";
    AttackSpec spec;
    double step_size = 0.0;
    double daa_bandwidth = 0.0;

    void add(CLI::App& app, bool with_method = true) {
        if (with_method) app.add_option("--attack", method, "fgsm | pgd | mifgsm | daa | dii-fgsm");
        app.add_option("--epsilon", spec.epsilon, "L-infinity radius");
        app.add_option("--iterations", spec.iterations, "iterations T");
        app.add_option("--step-size", step_size, "alpha; 0 selects 2.5*epsilon/T");
        app.add_option("--random-start", spec.random_start, "PGD uniform random start (true|false)");
        app.add_option("--momentum", spec.momentum, "MIFGSM momentum mu");
        app.add_option("--transform-prob", spec.transform_prob, "DII-FGSM transform probability p");
        app.add_option("--resize-min", spec.resize_min, "DII-FGSM smallest scale");
        app.add_option("--resize-max", spec.resize_max, "DII-FGSM scale upper bound (exclusive)");
        app.add_option("--daa-c", spec.daa_c, "DAA coupling coefficient c");
        app.add_option("--daa-bandwidth", daa_bandwidth, "DAA RBF bandwidth; 0 selects the median heuristic");
        app.add_option("--minibatch", spec.minibatch, "DAA coupling group size M");
        app.add_option("--attack-seed", spec.seed, "attack RNG seed");
    }

    AttackSpec resolve(std::string_view m) const {
        AttackSpec s = spec;
        s.method = parse_method(m);
        if (step_size > 0.0) s.step_size = step_size;
        if (daa_bandwidth > 0.0) s.daa_bandwidth = daa_bandwidth;
        s.validate();
        return s;
    }
    AttackSpec resolve() const { return resolve(method); }
};

struct TrainOptions {
    std::string arch = "cnn_small";
    std::uint64_t seed = 17;
    TrainConfig config;

    void add(CLI::App& app) {
        app.add_option("--arch", arch, "linear | mlp | cnn_small | cnn_wide");
        app.add_option("--seed", seed, "initialization and shuffling seed");
        app.add_option("--epochs", config.epochs, "training epochs");
        app.add_option("--batch-size", config.batch_size, "minibatch size");
        app.add_option("--lr", config.learning_rate, "Adam learning rate");
        app.add_option("--patience", config.patience, "early-stopping patience; 0 disables");
    }

    TrainConfig resolved() const {
        TrainConfig c = config;
        c.seed = seed;
        return c;
    }
};

struct DefenseOptions {
    DefenseSpec spec;
    AttackOptionsCli inner;

    DefenseOptions() { inner.spec = DefenseSpec::default_inner_attack(); }

    void add(CLI::App& app, bool with_training) {
        if (with_training) {
            app.add_option("--lambda", spec.lambda, "clean loss weight");
            app.add_option("--pretrain-epochs", spec.pretrain_epochs, "clean epochs before adversarial training");
            app.add_option("--select-on-robust", spec.select_on_robust, "select epochs on robust validation AUC");
            app.add_option("--inner-attack", inner.method, "attack used during adversarial training");
            app.add_option("--inner-epsilon", inner.spec.epsilon, "inner attack radius");
            app.add_option("--inner-iterations", inner.spec.iterations, "inner attack iterations");
            app.add_option("--inner-seed", inner.spec.seed, "inner attack seed");
        }
        app.add_option("--deflections", spec.deflections, "pixel deflections per image");
        app.add_option("--window", spec.window, "deflection window radius");
        app.add_option("--nlm-h", spec.nlm_h, "non-local means filtering strength");
        app.add_option("--patch-radius", spec.patch_radius, "non-local means patch radius");
        app.add_option("--search-radius", spec.search_radius, "non-local means search radius");
        app.add_option("--defense-seed", spec.seed, "pixel deflection seed");
    }

    DefenseSpec resolved() const {
        DefenseSpec s = spec;
        s.inner = inner.resolve();
        s.validate();
        return s;
    }
};

NamedModel load_named(const std::string& entry) {
    std::string name, path;
    if (auto eq = entry.find('='); eq != std::string::npos) {
        name = entry.substr(0, eq);
        path = entry.substr(eq + 1);
    } else {
        path = entry;
        name = fs::path(path).stem().string();
    }
    if (!fs::exists(path)) throw PlanError("model checkpoint \"" + path + "\" does not exist");
    return {name, std::make_shared<Model>(load_model(path))};
}

std::vector<NamedModel> load_models(const std::string& list) {
    std::vector<NamedModel> out;
    for (const auto& e : split_names(list)) out.push_back(load_named(e));
    if (out.empty()) throw PlanError("no models given");
    return out;
}

std::vector<AttackSpec> attack_grid(const AttackOptionsCli& a, const std::string& methods) {
    std::vector<AttackSpec> out;
    for (const auto& m : split_names(methods)) out.push_back(a.resolve(m));
    if (out.empty()) throw PlanError("empty attack grid");
    return out;
}

nlohmann::json history_json(const TrainResult& r) {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& e : r.history)
        h.push_back({{"epoch", e.epoch},
                     {"train_loss", e.train_loss},
                     {"val_score", e.val_mean_auc ? nlohmann::json(*e.val_mean_auc) : nlohmann::json(nullptr)}});
    return {{"history", h}, {"best_epoch", r.best_epoch}, {"stopped_early", r.stopped_early}};
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_file_atomic(path, text);
}

// ---- config file ----------------------------------------------------------

std::vector<std::string> config_arguments(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PlanError("config file \"" + path + "\" cannot be read");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw PlanError("config file \"" + path + "\": " + e.what());
    }
    if (!j.is_object()) throw PlanError("config file \"" + path + "\" must hold a JSON object");
    auto scalar = [&](const nlohmann::json& v, const std::string& key) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        if (v.is_number()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
            return buf;
        }
        throw PlanError("config key \"" + key + "\" has an unsupported value");
    };
    std::vector<std::string> args;
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string key = it.key();
        for (auto& c : key)
            if (c == '_') c = '-';
        std::string value;
        if (it->is_array()) {
            for (std::size_t i = 0; i < it->size(); ++i) value += (i ? "," : "") + scalar((*it)[i], it.key());
        } else {
            value = scalar(*it, it.key());
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

void take_last_everywhere(CLI::App& app) {
    for (auto* opt : app.get_options())
        if (opt->get_type_size() != 0) opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) take_last_everywhere(*sub);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adversarial attack and defense toolkit for multi-label image classifiers"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_help_all_flag("--help-all", "Expand all help");
    std::string config_path;
    app.add_option("--config", config_path, "JSON object of option values; overrides flags");

    int exit_code = kExitOk;
    auto guarded = [&](auto&& body) {
        return [&exit_code, body]() mutable {
            try {
                body();
            } catch (const PlanError& e) {
                std::cerr << "error: " << e.what() << '\n';
                exit_code = kExitInvalid;
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << '\n';
                exit_code = kExitInvalid;
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                exit_code = kExitRuntime;
            }
        };
    };

    // generate
    auto* gen = app.add_subcommand("generate", "Write a synthetic chest-image benchmark");
    SyntheticConfig synth;
    std::string gen_out;
    gen->add_option("--out", gen_out, "output AXDS file")->required();
    gen->add_option("--count", synth.count, "number of images");
    gen->add_option("--side", synth.side, "image side length");
    gen->add_option("--labels", synth.num_labels, "number of labels");
    gen->add_option("--seed", synth.seed, "generator seed");
    gen->add_option("--uncertainty-rate", synth.uncertainty_rate, "fraction of labels marked uncertain");
    gen->add_option("--noise-sigma", synth.noise_sigma, "pixel noise standard deviation");
    gen->add_option("--distractor-rate", synth.distractor_rate, "blob probability for negative labels");
    gen->add_option("--texture-amplitude", synth.texture_amplitude, "texture cue amplitude");
    gen->add_option("--texture-period", synth.texture_period, "texture cue period in pixels");
    gen->callback(guarded([&] {
        const Dataset d = generate_synthetic(synth);
        write_dataset(d, gen_out);
        std::cout << "wrote " << d.size() << " images to " << gen_out << '\n';
    }));

    // train
    auto* train_cmd = app.add_subcommand("train", "Standard training on the train split");
    DataOptions train_data;
    TrainOptions train_opts;
    std::string train_out, train_log;
    train_data.add(*train_cmd, false);
    train_opts.add(*train_cmd);
    train_cmd->add_option("--out", train_out, "output AXMD checkpoint")->required();
    train_cmd->add_option("--log", train_log, "training history JSON (default stdout)");
    train_cmd->callback(guarded([&] {
        const DatasetSplits s = train_data.load_splits();
        Model m(parse_arch(train_opts.arch), s.train.side, s.train.num_labels(), train_opts.seed);
        const TrainResult r = train(m, s.train, s.val, train_opts.resolved());
        save_model(m, train_out);
        nlohmann::json j = history_json(r);
        j["arch"] = train_opts.arch;
        j["seed"] = train_opts.seed;
        j["test_mean_auc"] = evaluate_mean_auc(m, s.test);
        write_text(train_log, j.dump(2) + "\n");
    }));

    // advtrain
    auto* adv_cmd = app.add_subcommand("advtrain", "Adversarial training; writes a defended-model bundle");
    DataOptions adv_data;
    TrainOptions adv_opts;
    DefenseOptions adv_def;
    std::string adv_out, adv_log;
    adv_data.add(*adv_cmd, false);
    adv_opts.add(*adv_cmd);
    adv_def.add(*adv_cmd, true);
    adv_cmd->add_option("--out", adv_out, "bundle stem (<stem>.axmd, <stem>.defense.json)")->required();
    adv_cmd->add_option("--log", adv_log, "training history JSON (default stdout)");
    adv_cmd->callback(guarded([&] {
        const DatasetSplits s = adv_data.load_splits();
        const DefenseSpec spec = adv_def.resolved();
        Model m(parse_arch(adv_opts.arch), s.train.side, s.train.num_labels(), adv_opts.seed);
        const TrainResult r = adversarial_train(m, s.train, &s.val, adv_opts.resolved(), spec);
        save_bundle(m, spec, adv_out);
        nlohmann::json j = history_json(r);
        j["arch"] = adv_opts.arch;
        j["seed"] = adv_opts.seed;
        j["test_mean_auc"] = evaluate_mean_auc(m, s.test);
        write_text(adv_log, j.dump(2) + "\n");
    }));

    // attack
    auto* attack_cmd = app.add_subcommand("attack", "Craft adversarial examples and evaluate them");
    DataOptions attack_data;
    AttackOptionsCli attack_opts;
    std::string attack_model, attack_target, attack_batch_out, attack_report;
    attack_data.add(*attack_cmd);
    attack_opts.add(*attack_cmd);
    attack_cmd->add_option("--model", attack_model, "source model checkpoint ([name=]path)")->required();
    attack_cmd->add_option("--target", attack_target, "evaluated model; defaults to the source");
    attack_cmd->add_option("--out", attack_batch_out, "AXAD adversarial batch file");
    attack_cmd->add_option("--report", attack_report, "report stem (<stem>.csv, <stem>.json)");
    attack_cmd->callback(guarded([&] {
        const Dataset test = attack_data.load();
        ExperimentPlan plan;
        plan.kind = ExperimentKind::kTransferMatrix;
        plan.sources = {load_named(attack_model)};
        plan.targets = {attack_target.empty() ? plan.sources.front() : load_named(attack_target)};
        plan.attacks = {attack_opts.resolve()};
        plan.seed = attack_data.split_seed;
        if (!attack_batch_out.empty()) {
            validate_plan(plan, test);
            AdversarialBatch batch;
            batch.spec = plan.attacks.front();
            for (std::size_t i = 0; i < test.size(); ++i) batch.clean_indices.push_back(static_cast<std::uint32_t>(i));
            batch.images = run_attack(*plan.sources.front().model, test.images(), test.label_tensor(), batch.spec);
            write_adversarial_batch(batch, attack_batch_out);
        }
        const auto reports = run_transfer_matrix(plan, test);
        if (attack_report.empty())
            std::cout << reports_csv(reports);
        else
            write_reports(reports, attack_report);
    }));

    // defend-eval
    auto* defend_cmd = app.add_subcommand("defend-eval", "Evaluate a defended model, clean and under attack");
    DataOptions defend_data;
    AttackOptionsCli defend_attack;
    std::string defend_bundle, defend_standard, defend_mode = "combined", defend_report;
    defend_data.add(*defend_cmd);
    defend_attack.add(*defend_cmd);
    defend_cmd->add_option("--bundle", defend_bundle, "defended-model bundle stem")->required();
    defend_cmd->add_option("--standard", defend_standard, "standard model; crafting source for pdt/combined");
    defend_cmd->add_option("--mode", defend_mode, "advtrain | pdt | combined");
    defend_cmd->add_option("--report", defend_report, "report stem (<stem>.csv, <stem>.json)");
    defend_cmd->callback(guarded([&] {
        const Dataset test = defend_data.load();
        if (!fs::exists(defend_bundle + ".axmd")) throw PlanError("bundle \"" + defend_bundle + "\" does not exist");
        DefendedBundle bundle = load_bundle(defend_bundle);
        const auto robust = std::make_shared<Model>(std::move(bundle.model));
        ExperimentPlan plan;
        plan.kind = ExperimentKind::kDefenseSweep;
        plan.targets = {{fs::path(defend_bundle).filename().string(), robust}};
        plan.sources = {defend_standard.empty() ? plan.targets.front() : load_named(defend_standard)};
        plan.attacks = {defend_attack.resolve()};
        plan.epsilon_grid = {plan.attacks.front().epsilon};
        plan.defense = bundle.spec;
        plan.seed = defend_data.split_seed;
        std::vector<EvalReport> reports;
        for (auto& r : run_defense_sweep(plan, test))
            if (r.defense == defend_mode) reports.push_back(std::move(r));
        if (reports.empty()) throw PlanError("unknown defense mode \"" + defend_mode + "\"");
        if (defend_report.empty())
            std::cout << reports_csv(reports);
        else
            write_reports(reports, defend_report);
    }));

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Iteration, epsilon and defense sweeps");
    sweep->require_subcommand(1);
    DataOptions sweep_data;
    AttackOptionsCli sweep_attack;
    std::string sweep_methods = "pgd,mifgsm,daa,dii-fgsm,fgsm", sweep_out;
    std::string iter_source, iter_target, iter_grid = "1,2,5,10,20,40,80";
    std::string eps_model, eps_grid = "0.01,0.05,0.1,0.2,0.3,0.4";
    std::size_t eps_iterations = 40;
    std::string def_standard, def_bundle, def_grid = "0.01,0.05,0.1,0.2,0.3";

    auto* iters = sweep->add_subcommand("iters", "White- and black-box AUC against the iteration count");
    sweep_data.add(*iters);
    sweep_attack.add(*iters, false);
    iters->add_option("--methods", sweep_methods, "comma-separated attack methods");
    iters->add_option("--source", iter_source, "crafting model ([name=]path)")->required();
    iters->add_option("--target", iter_target, "black-box model ([name=]path)")->required();
    iters->add_option("--grid", iter_grid, "comma-separated iteration counts");
    iters->add_option("--out", sweep_out, "report stem")->required();
    iters->callback(guarded([&] {
        const Dataset test = sweep_data.load();
        ExperimentPlan plan;
        plan.kind = ExperimentKind::kIterSweep;
        plan.sources = {load_named(iter_source)};
        plan.targets = {load_named(iter_target)};
        plan.attacks = attack_grid(sweep_attack, sweep_methods);
        plan.iteration_grid = parse_list<std::size_t>(iter_grid, "iteration grid");
        plan.seed = sweep_data.split_seed;
        write_reports(run_iter_sweep(plan, test), sweep_out);
    }));

    auto* eps = sweep->add_subcommand("eps", "White-box AUC and L2 distance against epsilon");
    sweep_data.add(*eps);
    sweep_attack.add(*eps, false);
    eps->add_option("--methods", sweep_methods, "comma-separated attack methods");
    eps->add_option("--model", eps_model, "model ([name=]path)")->required();
    eps->add_option("--grid", eps_grid, "comma-separated epsilon values");
    eps->add_option("--sweep-iterations", eps_iterations, "iterations per attack");
    eps->add_option("--out", sweep_out, "report stem")->required();
    eps->callback(guarded([&] {
        const Dataset test = sweep_data.load();
        ExperimentPlan plan;
        plan.kind = ExperimentKind::kEpsSweep;
        plan.sources = {load_named(eps_model)};
        plan.attacks = attack_grid(sweep_attack, sweep_methods);
        plan.epsilon_grid = parse_list<double>(eps_grid, "epsilon grid");
        plan.sweep_iterations = eps_iterations;
        plan.seed = sweep_data.split_seed;
        write_reports(run_eps_sweep(plan, test), sweep_out);
    }));

    auto* def = sweep->add_subcommand("defense", "AdvTrain, PDT and combined AUC against epsilon");
    sweep_data.add(*def);
    sweep_attack.add(*def, false);
    def->add_option("--standard", def_standard, "standard model ([name=]path)")->required();
    def->add_option("--bundle", def_bundle, "adversarially trained bundle stem")->required();
    def->add_option("--grid", def_grid, "comma-separated epsilon values");
    def->add_option("--out", sweep_out, "report stem")->required();
    def->callback(guarded([&] {
        const Dataset test = sweep_data.load();
        if (!fs::exists(def_bundle + ".axmd")) throw PlanError("bundle \"" + def_bundle + "\" does not exist");
        DefendedBundle bundle = load_bundle(def_bundle);
        ExperimentPlan plan;
        plan.kind = ExperimentKind::kDefenseSweep;
        plan.sources = {load_named(def_standard)};
        plan.targets = {{fs::path(def_bundle).filename().string(), std::make_shared<Model>(std::move(bundle.model))}};
        plan.attacks = {sweep_attack.resolve("pgd")};
        plan.epsilon_grid = parse_list<double>(def_grid, "epsilon grid");
        plan.defense = bundle.spec;
        plan.seed = sweep_data.split_seed;
        write_reports(run_defense_sweep(plan, test), sweep_out);
    }));

    // matrix
    auto* matrix = app.add_subcommand("matrix", "Transfer matrix: sources x methods x targets");
    DataOptions matrix_data;
    AttackOptionsCli matrix_attack;
    std::string matrix_models, matrix_methods = "pgd,mifgsm,daa,dii-fgsm,fgsm", matrix_out;
    matrix_data.add(*matrix);
    matrix_attack.add(*matrix, false);
    matrix->add_option("--models", matrix_models, "comma-separated [name=]path checkpoints")->required();
    matrix->add_option("--methods", matrix_methods, "comma-separated attack methods");
    matrix->add_option("--out", matrix_out, "report stem")->required();
    matrix->callback(guarded([&] {
        const Dataset test = matrix_data.load();
        ExperimentPlan plan;
        plan.kind = ExperimentKind::kTransferMatrix;
        plan.sources = load_models(matrix_models);
        plan.targets = plan.sources;
        plan.attacks = attack_grid(matrix_attack, matrix_methods);
        plan.seed = matrix_data.split_seed;
        write_reports(run_transfer_matrix(plan, test), matrix_out);
    }));

    // ensemble
    auto* ensemble = app.add_subcommand("ensemble", "Ensemble-in-logits attacks with each model held out");
    DataOptions ens_data;
    AttackOptionsCli ens_attack;
    std::string ens_models, ens_methods = "pgd,mifgsm,daa,dii-fgsm,fgsm", ens_out;
    ens_data.add(*ensemble);
    ens_attack.add(*ensemble, false);
    ensemble->add_option("--models", ens_models, "comma-separated [name=]path checkpoints")->required();
    ensemble->add_option("--methods", ens_methods, "comma-separated attack methods");
    ensemble->add_option("--out", ens_out, "report stem")->required();
    ensemble->callback(guarded([&] {
        const Dataset test = ens_data.load();
        ExperimentPlan plan;
        plan.kind = ExperimentKind::kEnsembleHoldout;
        plan.sources = load_models(ens_models);
        plan.attacks = attack_grid(ens_attack, ens_methods);
        plan.seed = ens_data.split_seed;
        write_reports(run_ensemble_holdout(plan, test), ens_out);
    }));

    take_last_everywhere(app);

    std::vector<std::string> args(argv + 1, argv + argc);
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config") continue;
        try {
            const auto extra = config_arguments(args[i + 1]);
            args.insert(args.end(), extra.begin(), extra.end());
        } catch (const PlanError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kExitInvalid;
        }
        break;
    }
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInvalid;
    }
    return exit_code;
}
