#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "axrx/attacks.hpp"
#include "axrx/defenses.hpp"
#include "axrx/metrics.hpp"

namespace axrx {

/// One evaluated cell of an experiment.
struct EvalReport {
    std::string experiment;
    std::string source;   // model the examples were crafted on; empty for clean cells
    std::string target;   // model that was evaluated
    std::string defense;  // none | advtrain | pdt | combined
    std::vector<std::string> label_names;
    AucSummary auc;
    std::optional<double> l2;
    std::size_t count = 0;
    std::optional<AttackSpec> attack;
    std::optional<DefenseSpec> defense_spec;
    std::vector<double> ensemble_weights;  // empty unless crafted on an ensemble
    std::uint64_t seed = 0;
    // Measured but never serialized, so reruns produce identical files.
    double wall_clock_seconds = 0.0;
};

/// Canonical JSON: sorted keys, two-space indentation.
std::string report_json(const EvalReport& report);
std::string reports_json(std::span<const EvalReport> reports);

/// Flat CSV with a header naming every attack field, the defense fields and
/// the metric columns. All reports must share label names.
std::string reports_csv(std::span<const EvalReport> reports);

/// The averaging convention stated in every report.
inline constexpr const char* kAucConvention = "per-label Mann-Whitney AUC, mean over labels with both classes";

}  // namespace axrx
