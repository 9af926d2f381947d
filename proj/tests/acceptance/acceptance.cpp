// Acceptance suite: one PASS/FAIL line per criterion on the synthetic
// benchmark (N=4000, S=32, L=6, seeds 17, 23, 42).
#include <axrx/attacks.hpp>
#include <axrx/binary_io.hpp>
#include <axrx/data.hpp>
#include <axrx/defenses.hpp>
#include <axrx/experiments.hpp>
#include <axrx/metrics.hpp>
#include <axrx/models.hpp>
#include <axrx/ops.hpp>
#include <axrx/rng.hpp>
#include <axrx/tape.hpp>
#include <axrx/train.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace axrx;

namespace {

constexpr std::uint64_t kSeeds[] = {17, 23, 42};
constexpr double kLearningRate = 3e-3;
constexpr std::size_t kEpochs = 30;
constexpr std::size_t kAdvEpochs = 14;  // after the clean pretraining epochs
constexpr double kSweepNlmH = 2.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const Outcome& o, double seconds, double budget) {
    const bool in_time = seconds <= budget;
    const bool pass = o.pass && in_time;
    if (!pass) ++g_failures;
    std::printf("%s  [%2d] %-28s %7.1fs (budget %.0fs)  %s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(), seconds,
                budget, o.detail.c_str(), in_time ? "" : "  [over time budget]");
    std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Models and data shared by the trend criteria of one seed.
struct SeedWorld {
    std::uint64_t seed = 0;
    DatasetSplits split;
    Tensor x, y;
    std::map<Arch, std::shared_ptr<Model>> standard;
    std::shared_ptr<Model> robust;
    double training_seconds = 0.0;
    double adv_training_seconds = 0.0;

    const Model& cnn() const { return *standard.at(Arch::kCnnSmall); }
};

TrainConfig train_config(std::uint64_t seed) {
    TrainConfig c;
    c.epochs = kEpochs;
    c.learning_rate = kLearningRate;
    c.seed = seed;
    return c;
}

DefenseSpec defense_spec(std::uint64_t seed) {
    DefenseSpec d;
    d.inner.seed = seed;
    d.seed = seed;
    return d;
}

SeedWorld& world(std::uint64_t seed) {
    static std::map<std::uint64_t, SeedWorld> cache;
    auto [it, fresh] = cache.try_emplace(seed);
    SeedWorld& w = it->second;
    if (!fresh) return w;
    w.seed = seed;
    SyntheticConfig sc;
    sc.seed = seed;
    const Dataset d = resolve_labels(generate_synthetic(sc), LabelPolicy::standard(default_label_names()));
    w.split = split_dataset(d, seed);
    w.x = w.split.test.images();
    w.y = w.split.test.label_tensor();
    const auto t0 = Clock::now();
    for (Arch a : all_archs()) {
        auto m = std::make_shared<Model>(a, sc.side, sc.num_labels, seed);
        train(*m, w.split.train, w.split.val, train_config(seed));
        w.standard[a] = m;
    }
    w.training_seconds = seconds_since(t0);
    return w;
}

SeedWorld& robust_world(std::uint64_t seed) {
    SeedWorld& w = world(seed);
    if (w.robust) return w;
    const auto t0 = Clock::now();
    w.robust = std::make_shared<Model>(Arch::kCnnSmall, 32, 6, seed);
    TrainConfig c = train_config(seed);
    c.epochs = kAdvEpochs;
    adversarial_train(*w.robust, w.split.train, &w.split.val, c, defense_spec(seed));
    w.adv_training_seconds = seconds_since(t0);
    return w;
}

double auc_of(const Classifier& m, const Tensor& x, const Tensor& y) { return mean_auc(predict(m, x), y).mean; }

AttackSpec spec_for(AttackMethod m, double eps, std::size_t iters, std::uint64_t seed) {
    AttackSpec s;
    s.method = m;
    s.epsilon = eps;
    s.iterations = iters;
    s.seed = seed;
    return s;
}

std::string seed_tag(std::uint64_t s) { return "seed " + std::to_string(s); }

Outcome majority(const std::vector<std::pair<bool, std::string>>& per_seed, std::size_t needed) {
    std::size_t ok = 0;
    std::string detail;
    for (const auto& [pass, text] : per_seed) {
        ok += pass;
        detail += (detail.empty() ? "" : "; ") + text + (pass ? " ok" : " no");
    }
    return {ok >= needed, std::to_string(ok) + "/" + std::to_string(per_seed.size()) + " seeds [" + detail + "]"};
}

// ---------------------------------------------------------------- 1
double relative_error(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-3}); }

double central_difference(double& v, const std::function<double()>& f, double h) {
    const double keep = v;
    v = keep + h;
    const double up = f();
    v = keep - h;
    const double down = f();
    v = keep;
    return (up - down) / (2 * h);
}

// Step 1e-5; a mismatch is remeasured with step 1e-7 so that a ReLU or
// max-pool kink inside the wider step is not mistaken for a wrong gradient.
std::size_t g_kink_retries = 0;

double coordinate_error(double analytic, double& v, const std::function<double()>& f) {
    const double e = relative_error(analytic, central_difference(v, f, 1e-5));
    if (e <= 1e-4) return e;
    ++g_kink_retries;
    return std::min(e, relative_error(analytic, central_difference(v, f, 1e-7)));
}

Outcome criterion_gradients() {
    // Side 18 is the smallest side every architecture accepts.
    constexpr std::size_t kSide = 18, kInputs = 20;
    double worst_x = 0.0, worst_theta = 0.0;
    std::string detail;
    for (Arch a : all_archs()) {
        Model m(a, kSide, 6, 100 + static_cast<std::uint64_t>(a));
        double ex = 0.0, et = 0.0;
        for (std::size_t k = 0; k < kInputs; ++k) {
            Rng rng(k, static_cast<std::uint64_t>(a));
            Tensor x({1, 1, kSide, kSide});
            for (auto& v : x.mutable_data()) v = rng.uniform(0.02, 0.98);
            Tensor y({1, 6});
            for (auto& v : y.mutable_data()) v = rng.bernoulli(0.5);

            const Tensor gx = input_gradient(m, x, y);
            Tensor probe = x.clone();
            auto loss_x = [&] { return bce_loss(m.logits(probe), y).item(); };
            auto px = probe.mutable_data();
            for (std::size_t i = 0; i < px.size(); ++i)
                ex = std::max(ex, coordinate_error(gx.data()[i], px[i], loss_x));

            for (auto& p : m.parameters()) p.zero_grad();
            {
                Tape tape;
                tape.backward(bce_loss(m.forward_trainable(x), y));
            }
            auto loss_t = [&] { return bce_loss(m.logits(x), y).item(); };
            // Every parameter of the small nets; a fixed sample of the big dense layers.
            for (auto& p : m.parameters()) {
                auto d = p.mutable_data();
                const std::size_t stride = d.size() > 2048 ? d.size() / 512 : 1;
                for (std::size_t i = k % stride; i < d.size(); i += stride)
                    et = std::max(et, coordinate_error(p.grad()[i], d[i], loss_t));
            }
        }
        worst_x = std::max(worst_x, ex);
        worst_theta = std::max(worst_theta, et);
        detail += std::string(detail.empty() ? "" : ", ") + std::string(arch_name(a)) + " x " + fmt("%.1e", ex) +
                  " theta " + fmt("%.1e", et);
    }
    return {worst_x <= 1e-4 && worst_theta <= 1e-4,
            "max rel err " + detail + ", " + std::to_string(g_kink_retries) + " coordinates remeasured"};
}

// ---------------------------------------------------------------- 2
class Recorder {
public:
    IterateObserver observer() {
        return [this](std::size_t first, std::size_t t, const Tensor& it) {
            std::lock_guard lock(mu_);
            seen_[{first, t}] = it.clone();
        };
    }
    bool operator==(const Recorder& o) const {
        if (seen_.size() != o.seen_.size()) return false;
        for (const auto& [k, t] : seen_) {
            auto it = o.seen_.find(k);
            if (it == o.seen_.end() || !bit_equal(t, it->second)) return false;
        }
        return true;
    }

private:
    std::mutex mu_;
    std::map<std::pair<std::size_t, std::size_t>, Tensor> seen_;
};

Outcome criterion_reductions() {
    const SeedWorld& w = world(17);
    const Tensor x = slice_rows(w.x, 0, 192), y = slice_rows(w.y, 0, 192);
    const Model& m = w.cnn();
    std::vector<std::pair<std::string, bool>> checks;

    AttackSpec base = spec_for(AttackMethod::kPgd, 0.3, 10, 5);
    auto traced = [&](AttackSpec s, auto fn) {
        auto rec = std::make_unique<Recorder>();
        AttackOptions o;
        o.observer = rec->observer();
        Tensor out = fn(m, x, y, s, o);
        return std::make_pair(out, std::move(rec));
    };
    auto [ifgsm, ifgsm_rec] = traced(base, attack_iterative_fgsm);
    AttackSpec mi = base;
    mi.method = AttackMethod::kMifgsm;
    mi.momentum = 0.0;
    auto [mi_out, mi_rec] = traced(mi, attack_mifgsm);
    checks.emplace_back("MIFGSM(mu=0)==I-FGSM", bit_equal(mi_out, ifgsm) && *mi_rec == *ifgsm_rec);
    AttackSpec dii = base;
    dii.method = AttackMethod::kDiiFgsm;
    dii.transform_prob = 0.0;
    auto [dii_out, dii_rec] = traced(dii, attack_diifgsm);
    checks.emplace_back("DII(p=0)==I-FGSM", bit_equal(dii_out, ifgsm) && *dii_rec == *ifgsm_rec);

    AttackSpec daa0 = base;
    daa0.method = AttackMethod::kDaa;
    daa0.daa_c = 0.0;
    AttackSpec pgd0 = base;
    pgd0.random_start = false;
    checks.emplace_back("DAA(c=0)==PGD(zero start)",
                        bit_equal(attack_daa(m, x, y, daa0), attack_pgd(m, x, y, pgd0)));

    AttackSpec m1 = base;
    m1.method = AttackMethod::kDaa;
    m1.minibatch = 1;
    AttackSpec m1c0 = m1;
    m1c0.daa_c = 0.0;
    auto [m1_out, m1_rec] = traced(m1, attack_daa);
    auto [m1c0_out, m1c0_rec] = traced(m1c0, attack_daa);
    checks.emplace_back("DAA(M=1)==DAA(c=0)", bit_equal(m1_out, m1c0_out) && *m1_rec == *m1c0_rec);

    AttackSpec one = base;
    one.iterations = 1;
    one.random_start = false;
    one.step_size = one.epsilon;
    AttackSpec f = base;
    f.method = AttackMethod::kFgsm;
    checks.emplace_back("PGD(T=1,zero,a=eps)==FGSM", bit_equal(attack_pgd(m, x, y, one), attack_fgsm(m, x, y, f)));

    // lambda = 1 adversarial training against standard training.
    const std::vector<std::size_t> idx = [] {
        std::vector<std::size_t> v(400);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = i;
        return v;
    }();
    const Dataset tr = w.split.train.subset(idx), va = w.split.val;
    TrainConfig c = train_config(17);
    c.epochs = 4;
    DefenseSpec ds = defense_spec(17);
    ds.lambda = 1.0;
    ds.pretrain_epochs = 0;
    Model a(Arch::kCnnSmall, 32, 6, 17), b(Arch::kCnnSmall, 32, 6, 17);
    adversarial_train(a, tr, &va, c, ds);
    train(b, tr, va, c);
    bool same = true;
    for (std::size_t k = 0; k < a.parameters().size(); ++k) same &= bit_equal(a.parameters()[k], b.parameters()[k]);
    checks.emplace_back("advtrain(lambda=1)==train", same);

    Outcome o{true, ""};
    for (const auto& [name, ok] : checks) {
        o.pass &= ok;
        o.detail += (o.detail.empty() ? "" : ", ") + name + (ok ? " ok" : " BROKEN");
    }
    return o;
}

// ---------------------------------------------------------------- 3
Outcome criterion_containment() {
    const std::vector<std::shared_ptr<Model>> models = {
        std::make_shared<Model>(Arch::kLinear, 8, 3, 1), std::make_shared<Model>(Arch::kMlp, 8, 3, 2),
        std::make_shared<Model>(Arch::kCnnSmall, 10, 3, 3)};
    Rng rng(31337);
    std::size_t violations = 0, iterates = 0;
    double worst = 0.0;
    constexpr int kRuns = 10000;
    for (int run = 0; run < kRuns; ++run) {
        const Model& m = *models[rng.index(models.size())];
        const std::size_t n = 1 + rng.index(4), s = m.side();
        Tensor x({n, 1, s, s});
        for (auto& v : x.mutable_data()) {
            // Include pixels on the range boundary.
            const double u = rng.uniform();
            v = u < 0.1 ? 0.0 : u > 0.9 ? 1.0 : rng.uniform();
        }
        Tensor y({n, 3});
        for (auto& v : y.mutable_data()) v = rng.bernoulli(0.5);
        AttackSpec spec;
        spec.method = all_methods()[rng.index(all_methods().size())];
        spec.epsilon = rng.uniform(0.0, 0.5);
        spec.iterations = 1 + rng.index(40);
        spec.momentum = rng.uniform(0.0, 2.0);
        spec.transform_prob = rng.uniform();
        spec.minibatch = 1 + rng.index(4);
        spec.daa_c = rng.uniform(0.0, 1.0);
        spec.seed = static_cast<std::uint64_t>(run);
        std::mutex mu;
        AttackOptions o;
        o.observer = [&](std::size_t first, std::size_t, const Tensor& it) {
            const std::size_t per = it.numel() / it.dim(0);
            auto origin = x.data().subspan(first * per, it.numel());
            std::size_t bad = 0;
            double far = 0.0;
            for (std::size_t i = 0; i < it.numel(); ++i) {
                const double v = it.data()[i], d = std::abs(v - origin[i]);
                far = std::max(far, d - spec.epsilon);
                bad += !(v >= 0.0 && v <= 1.0 && d <= spec.epsilon + 1e-12);
            }
            std::lock_guard lock(mu);
            violations += bad;
            worst = std::max(worst, far);
            ++iterates;
        };
        run_attack(m, x, y, spec, o);
    }
    return {violations == 0, std::to_string(kRuns) + " runs, " + std::to_string(iterates) + " iterates, " +
                                 std::to_string(violations) + " violations, max excess " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 4
Outcome criterion_efficacy() {
    std::vector<std::pair<bool, std::string>> per;
    for (std::uint64_t s : kSeeds) {
        const SeedWorld& w = world(s);
        const double clean = auc_of(w.cnn(), w.x, w.y);
        bool ok = clean >= 0.95;
        std::map<AttackMethod, double> white;
        for (AttackMethod m : all_methods()) white[m] = auc_of(w.cnn(), run_attack(w.cnn(), w.x, w.y, spec_for(m, 0.3, 10, s)), w.y);
        std::string text = seed_tag(s) + " clean " + fmt("%.3f", clean);
        for (AttackMethod m : all_methods()) {
            text += " " + std::string(method_name(m)) + " " + fmt("%.3f", white[m]);
            if (m == AttackMethod::kFgsm) continue;
            ok &= white[m] <= 0.20;
            ok &= white[AttackMethod::kFgsm] > white[m];
        }
        per.emplace_back(ok, text);
    }
    return majority(per, 2);
}

// ---------------------------------------------------------------- 5
Outcome criterion_transfer() {
    std::vector<std::pair<bool, std::string>> per;
    for (std::uint64_t s : kSeeds) {
        const SeedWorld& w = world(s);
        std::map<Arch, double> clean, white;
        std::map<Arch, Tensor> adv;
        for (Arch a : all_archs()) {
            const Model& m = *w.standard.at(a);
            clean[a] = auc_of(m, w.x, w.y);
            adv[a] = run_attack(m, w.x, w.y, spec_for(AttackMethod::kPgd, 0.3, 10, s));
            white[a] = auc_of(m, adv[a], w.y);
        }
        std::size_t ok = 0, total = 0;
        std::string broken;
        for (Arch a : all_archs())
            for (Arch b : all_archs()) {
                if (a == b) continue;
                const double black = auc_of(*w.standard.at(b), adv[a], w.y);
                const bool good = black < clean[b] && black > white[a];
                ok += good;
                ++total;
                if (!good)
                    broken += " " + std::string(arch_name(a)) + "->" + std::string(arch_name(b)) + " " +
                              fmt("%.3f", black);
            }
        per.emplace_back(ok == total, seed_tag(s) + " " + std::to_string(ok) + "/" + std::to_string(total) + broken);
    }
    return majority(per, 2);
}

// ---------------------------------------------------------------- 6
Outcome criterion_ensemble() {
    std::vector<std::pair<bool, std::string>> per;
    for (std::uint64_t s : kSeeds) {
        const SeedWorld& w = world(s);
        ExperimentPlan p;
        p.kind = ExperimentKind::kEnsembleHoldout;
        for (Arch a : all_archs()) p.sources.push_back({std::string(arch_name(a)), w.standard.at(a)});
        for (AttackMethod m : all_methods())
            if (is_multi_step(m)) p.attacks.push_back(spec_for(m, 0.3, 10, s));
        p.include_clean = false;
        p.seed = s;
        const auto rows = run_ensemble_holdout(p, w.split.test);
        std::size_t ok = 0, total = 0;
        double worst_gap = 1.0;
        std::string broken;
        for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
            const double gap = rows[i + 1].auc.mean - rows[i].auc.mean;  // hold-out minus ensemble
            worst_gap = std::min(worst_gap, gap);
            ok += gap >= 0.0;
            ++total;
            if (gap < 0.0)
                broken += " " + rows[i + 1].target + "/" + std::string(method_name(rows[i].attack->method)) + " " +
                          fmt("%.3f", rows[i].auc.mean) + ">" + fmt("%.3f", rows[i + 1].auc.mean);
        }
        per.emplace_back(ok == total, seed_tag(s) + " " + std::to_string(ok) + "/" + std::to_string(total) +
                                          " min gap " + fmt("%.3f", worst_gap) + broken);
    }
    return majority(per, 2);
}

// ---------------------------------------------------------------- 7
Outcome criterion_auc_oracle() {
    Rng rng(777);
    std::size_t mismatches = 0, undefined = 0;
    constexpr int kCases = 10000;
    for (int c = 0; c < kCases; ++c) {
        const std::size_t n = 1 + rng.index(12);
        const std::size_t levels = 1 + rng.index(8);  // few levels force ties
        std::vector<double> s(n);
        std::vector<std::uint8_t> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.bernoulli(0.3) ? rng.normal(0.0, 1.0) : static_cast<double>(rng.index(levels));
            y[i] = rng.bernoulli(0.5);
        }
        double wins = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (y[i] && !y[j]) {
                    ++pairs;
                    wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
                }
        const auto got = auc(s, y);
        if (pairs == 0) {
            ++undefined;
            mismatches += got.has_value();
        } else {
            mismatches += !got || *got != wins / static_cast<double>(pairs);
        }
    }
    return {mismatches == 0, std::to_string(kCases) + " cases (" + std::to_string(undefined) + " single-class), " +
                                 std::to_string(mismatches) + " mismatches"};
}

// ---------------------------------------------------------------- 8
Outcome criterion_adv_gain() {
    std::vector<std::pair<bool, std::string>> per;
    for (std::uint64_t s : kSeeds) {
        const SeedWorld& w = robust_world(s);
        const AttackSpec a = spec_for(AttackMethod::kPgd, 4.0 / 255.0, 10, s);
        const double std_clean = auc_of(w.cnn(), w.x, w.y);
        const double std_robust = auc_of(w.cnn(), run_attack(w.cnn(), w.x, w.y, a), w.y);
        const double adv_clean = auc_of(*w.robust, w.x, w.y);
        const double adv_robust = auc_of(*w.robust, run_attack(*w.robust, w.x, w.y, a), w.y);
        const bool ok = adv_robust - std_robust >= 0.15 && std::abs(adv_clean - std_clean) <= 0.05;
        per.emplace_back(ok, seed_tag(s) + " robust " + fmt("%.3f", std_robust) + "->" + fmt("%.3f", adv_robust) +
                                 " clean " + fmt("%.3f", std_clean) + "->" + fmt("%.3f", adv_clean));
    }
    return majority(per, 2);
}

// ---------------------------------------------------------------- 9
Outcome criterion_defense_sweep() {
    std::vector<std::pair<bool, std::string>> per;
    for (std::uint64_t s : kSeeds) {
        const SeedWorld& w = robust_world(s);
        ExperimentPlan p;
        p.kind = ExperimentKind::kDefenseSweep;
        p.sources = {{"cnn_small", w.standard.at(Arch::kCnnSmall)}};
        p.targets = {{"cnn_small_adv", w.robust}};
        p.attacks = {spec_for(AttackMethod::kPgd, 0.3, 10, s)};
        p.epsilon_grid = kDefaultDefenseEpsilonGrid;
        p.defense = defense_spec(s);
        p.defense.nlm_h = kSweepNlmH;
        p.include_clean = false;
        p.seed = s;
        std::map<std::string, std::vector<double>> series;
        for (const auto& r : run_defense_sweep(p, w.split.test)) series[r.defense].push_back(r.auc.mean);
        const auto& adv = series["advtrain"];
        const auto& pdt = series["pdt"];
        const auto& comb = series["combined"];
        const std::size_t last = adv.size() - 1;

        bool decreasing = true, above_pdt = true;
        for (std::size_t i = 0; i < adv.size(); ++i) {
            if (i > 0) decreasing &= adv[i] < adv[i - 1];
            above_pdt &= comb[i] >= pdt[i];
        }
        const double drop = comb.front() - comb.back();
        const bool flat = drop <= 0.10;
        const bool adv_first = adv.front() > pdt.front() && adv.front() > comb.front();
        const bool comb_last = comb[last] >= adv[last];
        std::string text = seed_tag(s) + " adv";
        for (double v : adv) text += fmt(" %.3f", v);
        text += " pdt";
        for (double v : pdt) text += fmt(" %.3f", v);
        text += " comb";
        for (double v : comb) text += fmt(" %.3f", v);
        text += std::string(" |") + (decreasing ? "" : " adv-not-decreasing") + (flat ? "" : " comb-drop=" + fmt("%.3f", drop)) +
                (above_pdt ? "" : " comb<pdt") + (adv_first ? "" : " adv-not-highest@0.01") +
                (comb_last ? "" : " comb<adv@0.3");
        per.emplace_back(decreasing && flat && above_pdt && adv_first && comb_last, text);
    }
    return majority(per, 2);
}

// ---------------------------------------------------------------- 10
Outcome criterion_distance() {
    std::vector<std::pair<bool, std::string>> per;
    for (std::uint64_t s : kSeeds) {
        const SeedWorld& w = world(s);
        ExperimentPlan p;
        p.kind = ExperimentKind::kEpsSweep;
        p.sources = {{"cnn_small", w.standard.at(Arch::kCnnSmall)}};
        for (AttackMethod m : all_methods()) p.attacks.push_back(spec_for(m, 0.3, 40, s));
        p.epsilon_grid = {0.01, 0.05, 0.1, 0.3};
        p.sweep_iterations = 40;
        p.include_clean = false;
        p.seed = s;
        std::map<AttackMethod, std::vector<double>> l2;
        for (const auto& r : run_eps_sweep(p, w.split.test)) l2[r.attack->method].push_back(*r.l2);
        bool rising = true, mi_max = true;
        std::string text = seed_tag(s) + " L2@0.3";
        for (AttackMethod m : all_methods()) {
            const auto& v = l2[m];
            rising &= v[0] <= v[1] && v[1] <= v[2];
            mi_max &= l2[AttackMethod::kMifgsm][3] >= v[3];
            text += " " + std::string(method_name(m)) + " " + fmt("%.2f", v[3]);
        }
        text += std::string(" |") + (rising ? "" : " not-rising") + (mi_max ? "" : " mifgsm-not-largest");
        per.emplace_back(rising && mi_max, text);
    }
    return majority(per, 2);
}

// ---------------------------------------------------------------- 11
int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(AXRX_CLI_PATH) + " " + args + " >>" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion_reproducibility(const fs::path& work) {
    const fs::path dir = work / "cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path log = dir / "cli.log";
    auto P = [&](const std::string& name) { return (dir / name).string(); };
    std::ofstream(dir / "attack.json") << R"({"epsilon": 0.2, "iterations": 5, "attack_seed": 3})";

    std::vector<std::string> setup = {
        "generate --out " + P("d.axds") + " --count 500 --side 16 --seed 5",
        "train --data " + P("d.axds") + " --arch cnn_small --epochs 3 --lr 3e-3 --out " + P("cnn.axmd") + " --log " + P("cnn.log.json"),
        "train --data " + P("d.axds") + " --arch mlp --epochs 3 --lr 3e-3 --out " + P("mlp.axmd") + " --log " + P("mlp.log.json"),
        "train --data " + P("d.axds") + " --arch linear --epochs 3 --lr 3e-3 --out " + P("lin.axmd") + " --log " + P("lin.log.json"),
        "advtrain --data " + P("d.axds") + " --arch cnn_small --epochs 1 --pretrain-epochs 1 --lr 3e-3 --out " + P("adv") + " --log " + P("adv.log.json"),
    };
    for (const auto& cmd : setup)
        if (run_cli(cmd, log) != 0) return {false, "setup command failed: " + cmd};

    const std::string data = " --data " + P("d.axds") + " --config " + P("attack.json");
    const std::string models = " --models cnn=" + P("cnn.axmd") + ",mlp=" + P("mlp.axmd") + ",lin=" + P("lin.axmd");
    const std::vector<std::pair<std::string, std::string>> plans = {
        {"attack", "attack" + data + " --model " + P("cnn.axmd") + " --target " + P("mlp.axmd") + " --attack pgd --out " + P("@.axad") + " --report " + P("@")},
        {"matrix", "matrix" + data + models + " --out " + P("@")},
        {"ensemble", "ensemble" + data + models + " --methods pgd,daa --out " + P("@")},
        {"iters", "sweep iters" + data + " --source " + P("cnn.axmd") + " --target " + P("mlp.axmd") + " --grid 1,2,5 --out " + P("@")},
        {"eps", "sweep eps" + data + " --model " + P("cnn.axmd") + " --grid 0.01,0.1 --sweep-iterations 5 --out " + P("@")},
        {"defense", "sweep defense" + data + " --standard " + P("cnn.axmd") + " --bundle " + P("adv") + " --grid 0.01,0.1 --out " + P("@")},
        {"defend-eval", "defend-eval" + data + " --bundle " + P("adv") + " --standard " + P("cnn.axmd") + " --mode combined --report " + P("@")},
    };
    std::size_t identical = 0;
    std::string broken;
    for (const auto& [name, tmpl] : plans) {
        std::string outputs[2];
        bool ran = true;
        for (int rep = 0; rep < 2; ++rep) {
            std::string cmd = tmpl;
            const std::string stem = name + "_" + std::to_string(rep);
            for (std::size_t at; (at = cmd.find('@')) != std::string::npos;) cmd.replace(at, 1, stem);
            ran &= run_cli(cmd, log) == 0;
            outputs[rep] = slurp(dir / (stem + ".csv")) + slurp(dir / (stem + ".json"));
            if (name == "attack") outputs[rep] += slurp(dir / (stem + ".axad"));
        }
        const bool same = ran && !outputs[0].empty() && outputs[0] == outputs[1];
        identical += same;
        if (!same) broken += " " + name + (ran ? " differs" : " failed");
    }
    return {identical == plans.size(),
            std::to_string(identical) + "/" + std::to_string(plans.size()) + " plans byte-identical" + broken};
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = fs::temp_directory_path() / "axrx_acceptance";
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--work-dir" && i + 1 < argc) work = argv[++i];
        else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string t; std::getline(ss, t, ',');) only.insert(std::stoi(t));
        } else {
            std::fprintf(stderr, "usage: %s [--work-dir DIR] [--only 1,4,9]\n", argv[0]);
            return 2;
        }
    }
    fs::create_directories(work);

    struct Criterion {
        int id;
        const char* name;
        double budget;
        std::function<Outcome()> run;
        bool uses_training;
        bool uses_adv_training;
    };
    const std::vector<Criterion> criteria = {
        {1, "gradient oracle", 60, criterion_gradients, false, false},
        {2, "reduction identities", 120, criterion_reductions, true, false},
        {3, "ball containment fuzz", 300, criterion_containment, false, false},
        {4, "attack efficacy", 900, criterion_efficacy, true, false},
        {5, "transfer pattern", 1200, criterion_transfer, true, false},
        {6, "ensemble hold-out", 1200, criterion_ensemble, true, false},
        {7, "AUC oracle", 60, criterion_auc_oracle, false, false},
        {8, "adversarial-training gain", 1800, criterion_adv_gain, true, true},
        {9, "defense sweep shape", 1800, criterion_defense_sweep, true, true},
        {10, "eps-sweep distance", 900, criterion_distance, true, false},
        {11, "reproducibility", 300, [&] { return criterion_reproducibility(work); }, false, false},
    };

    std::printf("acceptance: seeds 17 23 42, N=4000 S=32 L=6, lr %.0e, %zu epochs\n", kLearningRate, kEpochs);
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        // Shared training is charged to the first criterion that needs it.
        double shared = 0.0;
        for (std::uint64_t s : kSeeds) {
            if (!c.uses_training && !c.uses_adv_training) break;
            SeedWorld& w = world(s);
            shared += std::exchange(w.training_seconds, 0.0);
            if (c.uses_adv_training) shared += std::exchange(robust_world(s).adv_training_seconds, 0.0);
            if (c.id == 2) break;
        }
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        report(c.id, c.name, o, seconds_since(t0) + shared, c.budget);
    }
    std::printf("acceptance: %d failing criteria\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
