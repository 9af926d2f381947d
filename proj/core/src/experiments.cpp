#include "axrx/experiments.hpp"

#include <chrono>

#include "axrx/binary_io.hpp"

namespace axrx {

AttackRunner default_attack_runner() {
    return [](const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec) {
        return run_attack(model, x, y, spec);
    };
}

std::string_view experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::kTransferMatrix: return "transfer_matrix";
        case ExperimentKind::kEnsembleHoldout: return "ensemble_holdout";
        case ExperimentKind::kIterSweep: return "iter_sweep";
        case ExperimentKind::kEpsSweep: return "eps_sweep";
        case ExperimentKind::kDefenseSweep: return "defense_sweep";
    }
    throw std::invalid_argument("unknown experiment kind");
}

namespace {

using Clock = std::chrono::steady_clock;

void check_model(const NamedModel& m, const Dataset& test) {
    if (!m.model) throw PlanError("plan: model \"" + m.name + "\" is not loaded");
    if (m.model->side() != test.side || m.model->num_labels() != test.num_labels())
        throw PlanError("plan: model \"" + m.name + "\" expects side " + std::to_string(m.model->side()) + " and " +
                        std::to_string(m.model->num_labels()) + " labels; test set has side " +
                        std::to_string(test.side) + " and " + std::to_string(test.num_labels()));
}

struct Cell {
    const ExperimentPlan& plan;
    const Dataset& test;
    Tensor x;
    Tensor y;

    Cell(const ExperimentPlan& p, const Dataset& t) : plan(p), test(t), x(t.images()), y(t.label_tensor()) {}

    Tensor craft(const Classifier& model, const AttackSpec& spec) const {
        const AttackRunner& run = plan.runner ? plan.runner : default_attack_runner();
        Tensor adv = run(model, x, y, spec);
        if (adv.shape() != x.shape())
            throw std::runtime_error("attack runner returned " + shape_str(adv.shape()) + " for " +
                                     shape_str(x.shape()));
        return adv;
    }

    EvalReport report(std::string source, std::string target, std::string defense, const Tensor& logits,
                      const std::optional<AttackSpec>& attack, Clock::time_point started) const {
        EvalReport r;
        r.experiment = std::string(experiment_name(plan.kind));
        r.source = std::move(source);
        r.target = std::move(target);
        r.defense = std::move(defense);
        r.label_names = test.label_names;
        r.auc = mean_auc(logits, y);
        r.count = test.size();
        r.attack = attack;
        r.seed = plan.seed;
        r.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - started).count();
        return r;
    }

    EvalReport clean(const NamedModel& m) const {
        const auto t0 = Clock::now();
        return report("", m.name, "none", predict(*m.model, x), std::nullopt, t0);
    }
};

}  // namespace

void validate_plan(const ExperimentPlan& plan, const Dataset& test) {
    if (test.size() == 0) throw PlanError("plan: empty test set");
    if (!test.resolved()) throw PlanError("plan: test labels must be resolved to {0,1}");
    if (plan.sources.empty()) throw PlanError("plan: no source models");
    if (plan.attacks.empty()) throw PlanError("plan: empty attack grid");
    for (const auto& m : plan.sources) check_model(m, test);
    for (const auto& m : plan.targets) check_model(m, test);
    for (const auto& a : plan.attacks) {
        try {
            a.validate();
        } catch (const std::invalid_argument& e) {
            throw PlanError(std::string("plan: ") + e.what());
        }
    }
    switch (plan.kind) {
        case ExperimentKind::kTransferMatrix:
            if (plan.targets.empty()) throw PlanError("plan: transfer matrix needs target models");
            break;
        case ExperimentKind::kEnsembleHoldout:
            if (plan.sources.size() < 2) throw PlanError("plan: ensemble hold-out needs at least two models");
            break;
        case ExperimentKind::kIterSweep:
            if (plan.targets.empty()) throw PlanError("plan: iteration sweep needs a black-box target");
            if (plan.iteration_grid.empty()) throw PlanError("plan: empty iteration grid");
            for (auto t : plan.iteration_grid)
                if (t == 0) throw PlanError("plan: iteration counts must be >= 1");
            break;
        case ExperimentKind::kEpsSweep:
        case ExperimentKind::kDefenseSweep:
            if (plan.epsilon_grid.empty()) throw PlanError("plan: empty epsilon grid");
            for (double e : plan.epsilon_grid)
                if (!(e >= 0.0)) throw PlanError("plan: epsilon values must be >= 0");
            if (plan.kind == ExperimentKind::kEpsSweep && plan.sweep_iterations == 0)
                throw PlanError("plan: sweep iterations must be >= 1");
            if (plan.kind == ExperimentKind::kDefenseSweep) {
                if (plan.targets.empty()) throw PlanError("plan: defense sweep needs an adversarially trained model");
                try {
                    plan.defense.validate();
                } catch (const std::invalid_argument& e) {
                    throw PlanError(std::string("plan: ") + e.what());
                }
            }
            break;
    }
}

std::vector<EvalReport> run_transfer_matrix(const ExperimentPlan& plan, const Dataset& test) {
    validate_plan(plan, test);
    Cell cell(plan, test);
    std::vector<EvalReport> out;
    if (plan.include_clean)
        for (const auto& t : plan.targets) out.push_back(cell.clean(t));
    for (const auto& s : plan.sources)
        for (const auto& spec : plan.attacks) {
            const auto t0 = Clock::now();
            const Tensor adv = cell.craft(*s.model, spec);
            for (const auto& t : plan.targets)
                out.push_back(cell.report(s.name, t.name, "none", predict(*t.model, adv), spec, t0));
        }
    return out;
}

std::vector<EvalReport> run_ensemble_holdout(const ExperimentPlan& plan, const Dataset& test) {
    validate_plan(plan, test);
    Cell cell(plan, test);
    std::vector<EvalReport> out;
    if (plan.include_clean)
        for (const auto& m : plan.sources) out.push_back(cell.clean(m));
    for (std::size_t h = 0; h < plan.sources.size(); ++h) {
        std::vector<std::shared_ptr<const Classifier>> members;
        std::string name = "ensemble(";
        for (std::size_t k = 0; k < plan.sources.size(); ++k) {
            if (k == h) continue;
            if (!members.empty()) name += "+";
            name += plan.sources[k].name;
            members.push_back(plan.sources[k].model);
        }
        name += ")";
        const EnsembleModel ensemble = EnsembleModel::uniform(std::move(members));
        const NamedModel& holdout = plan.sources[h];
        for (const auto& spec : plan.attacks) {
            const auto t0 = Clock::now();
            const Tensor adv = cell.craft(ensemble, spec);
            EvalReport white = cell.report(name, name, "none", predict(ensemble, adv), spec, t0);
            EvalReport black = cell.report(name, holdout.name, "none", predict(*holdout.model, adv), spec, t0);
            white.ensemble_weights = black.ensemble_weights = ensemble.weights();
            out.push_back(std::move(white));
            out.push_back(std::move(black));
        }
    }
    return out;
}

std::vector<EvalReport> run_iter_sweep(const ExperimentPlan& plan, const Dataset& test) {
    validate_plan(plan, test);
    Cell cell(plan, test);
    const NamedModel& source = plan.sources.front();
    const NamedModel& target = plan.targets.front();
    std::vector<EvalReport> out;
    if (plan.include_clean) {
        out.push_back(cell.clean(source));
        out.push_back(cell.clean(target));
    }
    for (const auto& base : plan.attacks)
        for (std::size_t t : plan.iteration_grid) {
            AttackSpec spec = base;
            spec.iterations = t;
            const auto t0 = Clock::now();
            const Tensor adv = cell.craft(*source.model, spec);
            out.push_back(cell.report(source.name, source.name, "none", predict(*source.model, adv), spec, t0));
            out.push_back(cell.report(source.name, target.name, "none", predict(*target.model, adv), spec, t0));
        }
    return out;
}

std::vector<EvalReport> run_eps_sweep(const ExperimentPlan& plan, const Dataset& test) {
    validate_plan(plan, test);
    Cell cell(plan, test);
    const NamedModel& source = plan.sources.front();
    std::vector<EvalReport> out;
    if (plan.include_clean) out.push_back(cell.clean(source));
    for (const auto& base : plan.attacks)
        for (double eps : plan.epsilon_grid) {
            AttackSpec spec = base;
            spec.epsilon = eps;
            spec.iterations = plan.sweep_iterations;
            const auto t0 = Clock::now();
            const Tensor adv = cell.craft(*source.model, spec);
            EvalReport r = cell.report(source.name, source.name, "none", predict(*source.model, adv), spec, t0);
            r.l2 = l2_distance(cell.x, adv);
            out.push_back(std::move(r));
        }
    return out;
}

std::vector<EvalReport> run_defense_sweep(const ExperimentPlan& plan, const Dataset& test) {
    validate_plan(plan, test);
    Cell cell(plan, test);
    const NamedModel& standard = plan.sources.front();
    const NamedModel& robust = plan.targets.front();
    const DefenseSpec& defense = plan.defense;
    std::vector<EvalReport> out;
    auto add = [&](EvalReport r) {
        r.defense_spec = defense;
        out.push_back(std::move(r));
    };
    if (plan.include_clean) {
        const auto t0 = Clock::now();
        add(cell.report("", robust.name, "advtrain", predict(*robust.model, cell.x), std::nullopt, t0));
        add(cell.report("", standard.name, "pdt", defend_pdt(*standard.model, cell.x, defense), std::nullopt, t0));
        add(cell.report("", robust.name, "combined", defend_combined(*robust.model, cell.x, defense), std::nullopt,
                        t0));
    }
    for (const auto& base : plan.attacks)
        for (double eps : plan.epsilon_grid) {
            AttackSpec spec = base;
            spec.epsilon = eps;
            const auto t0 = Clock::now();
            const Tensor white = cell.craft(*robust.model, spec);
            add(cell.report(robust.name, robust.name, "advtrain", predict(*robust.model, white), spec, t0));
            const Tensor transferred = cell.craft(*standard.model, spec);
            add(cell.report(standard.name, standard.name, "pdt", defend_pdt(*standard.model, transferred, defense),
                            spec, t0));
            add(cell.report(standard.name, robust.name, "combined",
                            defend_combined(*robust.model, transferred, defense), spec, t0));
        }
    return out;
}

std::vector<EvalReport> run_plan(const ExperimentPlan& plan, const Dataset& test) {
    switch (plan.kind) {
        case ExperimentKind::kTransferMatrix: return run_transfer_matrix(plan, test);
        case ExperimentKind::kEnsembleHoldout: return run_ensemble_holdout(plan, test);
        case ExperimentKind::kIterSweep: return run_iter_sweep(plan, test);
        case ExperimentKind::kEpsSweep: return run_eps_sweep(plan, test);
        case ExperimentKind::kDefenseSweep: return run_defense_sweep(plan, test);
    }
    throw PlanError("plan: unknown experiment kind");
}

void write_reports(std::span<const EvalReport> reports, const std::filesystem::path& stem) {
    write_file_atomic(std::filesystem::path(stem.string() + ".csv"), reports_csv(reports));
    write_file_atomic(std::filesystem::path(stem.string() + ".json"), reports_json(reports) + "\n");
}

}  // namespace axrx
