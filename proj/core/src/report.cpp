#include "axrx/report.hpp"

#include <cstdio>
#include <stdexcept>

#include "json_codec.hpp"

namespace axrx {

namespace {

Json report_object(const EvalReport& r) {
    Json j;
    j["experiment"] = r.experiment;
    j["source"] = r.source;
    j["target"] = r.target;
    j["defense"] = r.defense;
    j["count"] = r.count;
    j["seed"] = r.seed;
    j["mean_auc"] = r.auc.mean;
    j["defined_labels"] = r.auc.defined_labels;
    j["auc_convention"] = kAucConvention;
    Json per = Json::object();
    for (std::size_t k = 0; k < r.auc.per_label.size(); ++k) {
        const std::string name = k < r.label_names.size() ? r.label_names[k] : "label_" + std::to_string(k);
        per[name] = r.auc.per_label[k] ? Json(*r.auc.per_label[k]) : Json(nullptr);
    }
    j["per_label_auc"] = per;
    j["l2_distance"] = r.l2 ? Json(*r.l2) : Json(nullptr);
    j["attack"] = r.attack ? attack_spec_json(*r.attack) : Json(nullptr);
    j["defense_spec"] = r.defense_spec ? defense_spec_json(*r.defense_spec) : Json(nullptr);
    j["ensemble_weights"] = r.ensemble_weights;
    return j;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : ""; }

// Quotes a field when it contains a separator, quote or newline.
std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string report_json(const EvalReport& report) { return report_object(report).dump(2); }

std::string reports_json(std::span<const EvalReport> reports) {
    Json arr = Json::array();
    for (const auto& r : reports) arr.push_back(report_object(r));
    return arr.dump(2);
}

std::string reports_csv(std::span<const EvalReport> reports) {
    std::vector<std::string> names = reports.empty() ? std::vector<std::string>{} : reports.front().label_names;
    for (const auto& r : reports)
        if (r.label_names != names) throw std::invalid_argument("reports_csv: reports disagree on label names");

    std::string out =
        "experiment,source,target,defense,method,epsilon,alpha,iterations,step_size,random_start,momentum,"
        "transform_prob,resize_min,resize_max,daa_c,daa_bandwidth,minibatch,attack_seed,lambda,pretrain_epochs,"
        "deflections,window,nlm_h,patch_radius,search_radius,defense_seed,seed,count,mean_auc,defined_labels,"
        "l2_distance,ensemble_weights";
    for (const auto& n : names) out += "," + field("auc_" + n);
    out += '\n';

    for (const auto& r : reports) {
        std::vector<std::string> row = {field(r.experiment), field(r.source), field(r.target), field(r.defense)};
        if (r.attack) {
            const AttackSpec& a = *r.attack;
            row.insert(row.end(), {std::string(method_name(a.method)), num(a.epsilon), num(a.alpha()),
                                   std::to_string(a.steps()), opt_num(a.step_size), a.random_start ? "1" : "0",
                                   num(a.momentum), num(a.transform_prob), num(a.resize_min), num(a.resize_max),
                                   num(a.daa_c), opt_num(a.daa_bandwidth), std::to_string(a.minibatch),
                                   std::to_string(a.seed)});
        } else {
            row.insert(row.end(), {"none", "0", "", "0", "", "", "", "", "", "", "", "", "", ""});
        }
        if (r.defense_spec) {
            const DefenseSpec& d = *r.defense_spec;
            row.insert(row.end(), {num(d.lambda), std::to_string(d.pretrain_epochs), std::to_string(d.deflections),
                                   std::to_string(d.window), num(d.nlm_h), std::to_string(d.patch_radius),
                                   std::to_string(d.search_radius), std::to_string(d.seed)});
        } else {
            row.insert(row.end(), {"", "", "", "", "", "", "", ""});
        }
        row.insert(row.end(), {std::to_string(r.seed), std::to_string(r.count), num(r.auc.mean),
                               std::to_string(r.auc.defined_labels), opt_num(r.l2)});
        std::string weights;
        for (std::size_t k = 0; k < r.ensemble_weights.size(); ++k) weights += (k ? ";" : "") + num(r.ensemble_weights[k]);
        row.push_back(weights);
        for (std::size_t k = 0; k < names.size(); ++k)
            row.push_back(k < r.auc.per_label.size() ? opt_num(r.auc.per_label[k]) : "");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

}  // namespace axrx
