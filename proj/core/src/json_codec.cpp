#include "json_codec.hpp"

#include <stdexcept>

namespace axrx {

namespace {

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

template <typename T>
void read_nullable(const Json& j, const char* key, std::optional<T>& out) {
    if (auto it = j.find(key); it != j.end()) {
        if (it->is_null())
            out.reset();
        else
            out = it->get<T>();
    }
}

}  // namespace

Json attack_spec_json(const AttackSpec& s) {
    Json j;
    j["method"] = std::string(method_name(s.method));
    j["epsilon"] = s.epsilon;
    j["iterations"] = s.iterations;
    j["step_size"] = s.step_size ? Json(*s.step_size) : Json(nullptr);
    j["alpha"] = s.alpha();
    j["random_start"] = s.random_start;
    j["momentum"] = s.momentum;
    j["transform_prob"] = s.transform_prob;
    j["resize_min"] = s.resize_min;
    j["resize_max"] = s.resize_max;
    j["daa_c"] = s.daa_c;
    j["daa_bandwidth"] = s.daa_bandwidth ? Json(*s.daa_bandwidth) : Json(nullptr);
    j["minibatch"] = s.minibatch;
    j["seed"] = s.seed;
    return j;
}

AttackSpec attack_spec_from(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("attack spec: expected a JSON object");
    AttackSpec s;
    if (auto it = j.find("method"); it != j.end()) s.method = parse_method(it->get<std::string>());
    read_opt(j, "epsilon", s.epsilon);
    read_opt(j, "iterations", s.iterations);
    read_nullable(j, "step_size", s.step_size);
    read_opt(j, "random_start", s.random_start);
    read_opt(j, "momentum", s.momentum);
    read_opt(j, "transform_prob", s.transform_prob);
    read_opt(j, "resize_min", s.resize_min);
    read_opt(j, "resize_max", s.resize_max);
    read_opt(j, "daa_c", s.daa_c);
    read_nullable(j, "daa_bandwidth", s.daa_bandwidth);
    read_opt(j, "minibatch", s.minibatch);
    read_opt(j, "seed", s.seed);
    s.validate();
    return s;
}

Json defense_spec_json(const DefenseSpec& s) {
    Json j;
    j["lambda"] = s.lambda;
    j["inner_attack"] = attack_spec_json(s.inner);
    j["pretrain_epochs"] = s.pretrain_epochs;
    j["select_on_robust"] = s.select_on_robust;
    j["deflections"] = s.deflections;
    j["window"] = s.window;
    j["nlm_h"] = s.nlm_h;
    j["patch_radius"] = s.patch_radius;
    j["search_radius"] = s.search_radius;
    j["seed"] = s.seed;
    return j;
}

DefenseSpec defense_spec_from(const Json& j) {
    if (!j.is_object()) throw std::invalid_argument("defense spec: expected a JSON object");
    DefenseSpec s;
    read_opt(j, "lambda", s.lambda);
    if (auto it = j.find("inner_attack"); it != j.end()) s.inner = attack_spec_from(*it);
    read_opt(j, "pretrain_epochs", s.pretrain_epochs);
    read_opt(j, "select_on_robust", s.select_on_robust);
    read_opt(j, "deflections", s.deflections);
    read_opt(j, "window", s.window);
    read_opt(j, "nlm_h", s.nlm_h);
    read_opt(j, "patch_radius", s.patch_radius);
    read_opt(j, "search_radius", s.search_radius);
    read_opt(j, "seed", s.seed);
    s.validate();
    return s;
}

std::string attack_spec_to_json(const AttackSpec& spec) { return attack_spec_json(spec).dump(2); }

AttackSpec attack_spec_from_json(const std::string& text) {
    try {
        return attack_spec_from(Json::parse(text));
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("attack spec JSON: ") + e.what());
    }
}

std::string defense_spec_to_json(const DefenseSpec& spec) { return defense_spec_json(spec).dump(2); }

DefenseSpec defense_spec_from_json(const std::string& text) {
    try {
        return defense_spec_from(Json::parse(text));
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("defense spec JSON: ") + e.what());
    }
}

}  // namespace axrx
