#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "axrx/attacks.hpp"
#include "axrx/data.hpp"
#include "axrx/defenses.hpp"
#include "axrx/models.hpp"
#include "axrx/report.hpp"

namespace axrx {

/// A plan that cannot run as given (missing model, empty grid, shape mismatch).
class PlanError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct NamedModel {
    std::string name;
    std::shared_ptr<const Classifier> model;
};

/// Crafts adversarial examples; replaceable so plans can be tested with a
/// stand-in attack.
using AttackRunner =
    std::function<Tensor(const Classifier& model, const Tensor& x, const Tensor& y, const AttackSpec& spec)>;

AttackRunner default_attack_runner();

enum class ExperimentKind { kTransferMatrix, kEnsembleHoldout, kIterSweep, kEpsSweep, kDefenseSweep };

std::string_view experiment_name(ExperimentKind kind);

inline const std::vector<std::size_t> kDefaultIterationGrid = {1, 2, 5, 10, 20, 40, 80};
inline const std::vector<double> kDefaultEpsilonGrid = {0.01, 0.05, 0.1, 0.2, 0.3, 0.4};
inline const std::vector<double> kDefaultDefenseEpsilonGrid = {0.01, 0.05, 0.1, 0.2, 0.3};

struct ExperimentPlan {
    ExperimentKind kind = ExperimentKind::kTransferMatrix;
    // transfer_matrix: sources x attacks x targets.
    // ensemble_holdout: sources are the members, each held out in turn.
    // iter_sweep: sources[0] crafts, targets[0] is the black-box target.
    // eps_sweep: sources[0].
    // defense_sweep: sources[0] standard, targets[0] adversarially trained.
    std::vector<NamedModel> sources;
    std::vector<NamedModel> targets;
    std::vector<AttackSpec> attacks;
    std::vector<std::size_t> iteration_grid = kDefaultIterationGrid;
    std::vector<double> epsilon_grid = kDefaultEpsilonGrid;
    std::size_t sweep_iterations = 40;  // T of eps_sweep
    DefenseSpec defense;
    std::uint64_t seed = 0;
    AttackRunner runner;  // run_attack when empty
    bool include_clean = true;  // emit one unattacked row per evaluated model
};

/// Throws PlanError describing the first problem.
void validate_plan(const ExperimentPlan& plan, const Dataset& test);

std::vector<EvalReport> run_transfer_matrix(const ExperimentPlan& plan, const Dataset& test);
std::vector<EvalReport> run_ensemble_holdout(const ExperimentPlan& plan, const Dataset& test);
std::vector<EvalReport> run_iter_sweep(const ExperimentPlan& plan, const Dataset& test);
std::vector<EvalReport> run_eps_sweep(const ExperimentPlan& plan, const Dataset& test);
std::vector<EvalReport> run_defense_sweep(const ExperimentPlan& plan, const Dataset& test);
std::vector<EvalReport> run_plan(const ExperimentPlan& plan, const Dataset& test);

/// Writes <stem>.csv and <stem>.json, each atomically.
void write_reports(std::span<const EvalReport> reports, const std::filesystem::path& stem);

}  // namespace axrx
