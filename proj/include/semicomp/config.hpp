#pragma once

/// @file config.hpp
/// @brief JSON run configuration: schema, defaults, validation.
///
/// Every key is optional; omitted keys take the defaults of the member
/// initializers below. Unknown keys are errors. Validation collects every
/// violation before reporting.
///
///   grid      { nx=32, ny=32, lx=1, ly=1 }
///   time      { t_final=1, n_steps=10 }
///   phys      { rho=1, nu=0.01, beta=1, gamma=0.01, b=0, quasi_incompressible=false }
///   initial   { kind="rest"|"taylor_green"|"pulse"|"files", amplitude=0.01, pressure=0,
///               center=[lx/2, ly/2], width=0.1, velocity_x, velocity_y, pressure_file }
///   cost      { weights { kappa1..3, varkappa1..2, lambda1..2 },
///               targets { kind="zero"|"recoverable"|"files", amplitude=1,
///                         velocity_x, velocity_y, pressure } }
///   control   { init="zero"|"generator"|"file", amplitude=1, file_x, file_y }
///   optimizer { method="lbfgs"|"steepest_descent", max_iterations=100, grad_tol=1e-6,
///               armijo=1e-4, backtrack=0.5, max_backtracks=40, memory=10, target_reduction=0.1 }
///   gradcheck { n_directions=5, threshold=1e-6, consistency_threshold=1e-12 }
///   mms       { case="steady"|"temporal"|"space_time", ladder=[{n, n_steps}...], min_slope }
///   energy    { tolerance_per_dt=1 }
///   lipschitz { epsilons=[1e-2,1e-3,1e-4], max_variation=2 }
///   output    { dir="semicomp_out", snapshot_every=0 (n_steps/10), vtk=false }

#include <json.hpp>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "semicomp/control.hpp"
#include "semicomp/verify.hpp"

namespace semicomp {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
    [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& e) {
        std::string s = "invalid configuration:";
        for (const auto& x : e) s += "\n  - " + x;
        return s;
    }
    std::vector<std::string> errors_;
};

struct InitialSpec {
    std::string kind = "rest";
    double amplitude = 0.01;
    double pressure = 0.0;
    std::vector<double> center;  ///< empty: domain centre
    double width = 0.1;
    std::string velocity_x, velocity_y, pressure_file;
};

struct TargetSpec {
    std::string kind = "zero";
    double amplitude = 1.0;
    std::string velocity_x, velocity_y, pressure;
};

struct ControlInit {
    std::string init = "zero";
    double amplitude = 1.0;
    std::string file_x, file_y;
};

struct GradcheckSpec {
    int n_directions = 5;
    double threshold = 1e-6;
    double consistency_threshold = 1e-12;
};

struct MmsSpec {
    std::string case_name = "steady";
    std::vector<MmsLevel> ladder;  ///< empty: case default
    double min_slope = 0.0;        ///< 0: case default (1.9 space, 0.9 time)
};

struct RunConfig {
    GridSpec grid{32, 32, 1.0, 1.0};
    TimeSpec time{1.0, 10};
    PhysParams phys{};
    InitialSpec initial{};
    CostWeights weights{};
    TargetSpec targets{};
    ControlInit control{};
    OptimizeOptions optimizer{};
    double target_reduction = 0.1;
    GradcheckSpec gradcheck{};
    MmsSpec mms{};
    double energy_tolerance_per_dt = 1.0;
    std::vector<double> lipschitz_epsilons{1e-2, 1e-3, 1e-4};
    double lipschitz_max_variation = 2.0;
    std::string output_dir = "semicomp_out";
    int snapshot_every = 0;
    bool vtk = false;

    [[nodiscard]] int snapshot_stride() const {
        if (snapshot_every > 0) return snapshot_every;
        return std::max(1, time.n_steps / 10);
    }
};

namespace detail {

using nlohmann::json;

/// Walks one JSON object, recording type errors and unknown keys.
class ObjectReader {
public:
    ObjectReader(const json* obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (obj_ != nullptr && !obj_->is_object()) {
            errors_.push_back(path_ + " must be an object");
            obj_ = nullptr;
        }
    }

    void number(const char* key, double& out) {
        if (const json* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else errors_.push_back(name(key) + " must be a number");
        }
    }
    void integer(const char* key, int& out) {
        if (const json* v = find(key)) {
            if (v->is_number_integer()) out = v->get<int>();
            else errors_.push_back(name(key) + " must be an integer");
        }
    }
    void boolean(const char* key, bool& out) {
        if (const json* v = find(key)) {
            if (v->is_boolean()) out = v->get<bool>();
            else errors_.push_back(name(key) + " must be true or false");
        }
    }
    void string(const char* key, std::string& out, const std::vector<std::string>& allowed = {}) {
        if (const json* v = find(key)) {
            if (!v->is_string()) {
                errors_.push_back(name(key) + " must be a string");
                return;
            }
            out = v->get<std::string>();
            if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), out) == allowed.end()) {
                std::string list;
                for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
                errors_.push_back(name(key) + " must be one of: " + list);
            }
        }
    }
    void numbers(const char* key, std::vector<double>& out) {
        if (const json* v = find(key)) {
            if (!v->is_array()) {
                errors_.push_back(name(key) + " must be an array of numbers");
                return;
            }
            out.clear();
            for (const auto& e : *v) {
                if (!e.is_number()) {
                    errors_.push_back(name(key) + " must be an array of numbers");
                    return;
                }
                out.push_back(e.get<double>());
            }
        }
    }
    [[nodiscard]] const json* raw(const char* key) { return find(key); }
    ObjectReader child(const char* key) { return ObjectReader(find(key), name(key), errors_); }

    void finish() const {
        if (obj_ == nullptr) return;
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (seen_.count(it.key()) == 0) errors_.push_back("unknown key " + name(it.key().c_str()));
    }

private:
    const json* find(const char* key) {
        seen_.insert(key);
        if (obj_ == nullptr) return nullptr;
        const auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }
    [[nodiscard]] std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    const json* obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

}  // namespace detail

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"simulate", "optimize", "gradcheck", "mms", "energy-audit", "lipschitz"};
    return names;
}

/// Parses and validates a configuration for the given subcommand.
inline RunConfig parse_config(const std::string& text, const std::string& subcommand) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({"syntax error at byte " + std::to_string(e.byte) + ": " + e.what()});
    }
    std::vector<std::string> err;
    RunConfig c;
    detail::ObjectReader root(&doc, "", err);
    {
        auto r = root.child("grid");
        r.integer("nx", c.grid.nx);
        r.integer("ny", c.grid.ny);
        r.number("lx", c.grid.lx);
        r.number("ly", c.grid.ly);
        r.finish();
    }
    {
        auto r = root.child("time");
        r.number("t_final", c.time.t_final);
        r.integer("n_steps", c.time.n_steps);
        r.finish();
    }
    {
        auto r = root.child("phys");
        r.number("rho", c.phys.rho);
        r.number("nu", c.phys.nu);
        r.number("beta", c.phys.beta);
        r.number("gamma", c.phys.gamma);
        r.number("b", c.phys.b);
        r.boolean("quasi_incompressible", c.phys.quasi_incompressible);
        r.finish();
    }
    {
        auto r = root.child("initial");
        r.string("kind", c.initial.kind, {"rest", "taylor_green", "pulse", "files"});
        r.number("amplitude", c.initial.amplitude);
        r.number("pressure", c.initial.pressure);
        r.numbers("center", c.initial.center);
        r.number("width", c.initial.width);
        r.string("velocity_x", c.initial.velocity_x);
        r.string("velocity_y", c.initial.velocity_y);
        r.string("pressure_file", c.initial.pressure_file);
        r.finish();
    }
    {
        auto r = root.child("cost");
        auto w = r.child("weights");
        w.number("kappa1", c.weights.kappa1);
        w.number("kappa2", c.weights.kappa2);
        w.number("kappa3", c.weights.kappa3);
        w.number("varkappa1", c.weights.varkappa1);
        w.number("varkappa2", c.weights.varkappa2);
        w.number("lambda1", c.weights.lambda1);
        w.number("lambda2", c.weights.lambda2);
        w.finish();
        auto t = r.child("targets");
        t.string("kind", c.targets.kind, {"zero", "recoverable", "files"});
        t.number("amplitude", c.targets.amplitude);
        t.string("velocity_x", c.targets.velocity_x);
        t.string("velocity_y", c.targets.velocity_y);
        t.string("pressure", c.targets.pressure);
        t.finish();
        r.finish();
    }
    {
        auto r = root.child("control");
        r.string("init", c.control.init, {"zero", "generator", "file"});
        r.number("amplitude", c.control.amplitude);
        r.string("file_x", c.control.file_x);
        r.string("file_y", c.control.file_y);
        r.finish();
    }
    {
        auto r = root.child("optimizer");
        std::string method = "lbfgs";
        r.string("method", method, {"lbfgs", "steepest_descent"});
        c.optimizer.method = method == "steepest_descent" ? DescentMethod::SteepestDescent : DescentMethod::LBFGS;
        r.integer("max_iterations", c.optimizer.max_iterations);
        r.number("grad_tol", c.optimizer.grad_tol);
        r.number("armijo", c.optimizer.armijo);
        r.number("backtrack", c.optimizer.backtrack);
        r.integer("max_backtracks", c.optimizer.max_backtracks);
        r.integer("memory", c.optimizer.memory);
        r.number("target_reduction", c.target_reduction);
        r.finish();
    }
    {
        auto r = root.child("gradcheck");
        r.integer("n_directions", c.gradcheck.n_directions);
        r.number("threshold", c.gradcheck.threshold);
        r.number("consistency_threshold", c.gradcheck.consistency_threshold);
        r.finish();
    }
    {
        auto r = root.child("mms");
        r.string("case", c.mms.case_name, {"steady", "temporal", "space_time"});
        r.number("min_slope", c.mms.min_slope);
        if (const json* lad = r.raw("ladder")) {
            if (!lad->is_array()) err.emplace_back("mms.ladder must be an array of {n, n_steps}");
            else
                for (std::size_t i = 0; i < lad->size(); ++i) {
                    detail::ObjectReader lr(&(*lad)[i], "mms.ladder[" + std::to_string(i) + "]", err);
                    MmsLevel lv;
                    lr.integer("n", lv.n);
                    lr.integer("n_steps", lv.n_steps);
                    lr.finish();
                    c.mms.ladder.push_back(lv);
                }
        }
        r.finish();
    }
    {
        auto r = root.child("energy");
        r.number("tolerance_per_dt", c.energy_tolerance_per_dt);
        r.finish();
    }
    {
        auto r = root.child("lipschitz");
        r.numbers("epsilons", c.lipschitz_epsilons);
        r.number("max_variation", c.lipschitz_max_variation);
        r.finish();
    }
    {
        auto r = root.child("output");
        r.string("dir", c.output_dir);
        r.integer("snapshot_every", c.snapshot_every);
        r.boolean("vtk", c.vtk);
        r.finish();
    }
    root.finish();

    // Range checks.
    if (c.grid.nx < 4) err.emplace_back("grid.nx must be >= 4");
    if (c.grid.ny < 4) err.emplace_back("grid.ny must be >= 4");
    if (!(c.grid.lx > 0.0)) err.emplace_back("grid.lx must be > 0");
    if (!(c.grid.ly > 0.0)) err.emplace_back("grid.ly must be > 0");
    if (!(c.time.t_final > 0.0)) err.emplace_back("time.t_final must be > 0");
    if (c.time.n_steps < 1) err.emplace_back("time.n_steps must be >= 1");
    for (auto& v : c.phys.violations()) err.push_back(v);
    const bool needs_cost = subcommand == "optimize" || subcommand == "gradcheck";
    for (auto& v : c.weights.violations())
        if (needs_cost || v.find("kappa3") == std::string::npos) err.push_back(v);
    if (c.initial.kind == "files" && (c.initial.velocity_x.empty() || c.initial.velocity_y.empty() || c.initial.pressure_file.empty()))
        err.emplace_back("initial.kind = files needs initial.velocity_x, initial.velocity_y and initial.pressure_file");
    if (!c.initial.center.empty() && c.initial.center.size() != 2) err.emplace_back("initial.center must have 2 entries");
    if (!(c.initial.width > 0.0)) err.emplace_back("initial.width must be > 0");
    if (c.targets.kind == "files" && (c.targets.velocity_x.empty() || c.targets.velocity_y.empty() || c.targets.pressure.empty()))
        err.emplace_back("cost.targets.kind = files needs velocity_x, velocity_y and pressure");
    if (c.control.init == "file" && (c.control.file_x.empty() || c.control.file_y.empty()))
        err.emplace_back("control.init = file needs control.file_x and control.file_y");
    if (c.optimizer.max_iterations < 0) err.emplace_back("optimizer.max_iterations must be >= 0");
    if (!(c.optimizer.grad_tol > 0.0)) err.emplace_back("optimizer.grad_tol must be > 0");
    if (!(c.optimizer.armijo > 0.0 && c.optimizer.armijo < 1.0)) err.emplace_back("optimizer.armijo must be in (0, 1)");
    if (!(c.optimizer.backtrack > 0.0 && c.optimizer.backtrack < 1.0)) err.emplace_back("optimizer.backtrack must be in (0, 1)");
    if (c.optimizer.max_backtracks < 1) err.emplace_back("optimizer.max_backtracks must be >= 1");
    if (c.optimizer.memory < 1) err.emplace_back("optimizer.memory must be >= 1");
    if (!(c.target_reduction > 0.0)) err.emplace_back("optimizer.target_reduction must be > 0");
    if (c.gradcheck.n_directions < 1) err.emplace_back("gradcheck.n_directions must be >= 1");
    if (!c.mms.ladder.empty() && c.mms.ladder.size() < 3) err.emplace_back("mms.ladder needs at least 3 resolutions");
    for (const auto& lv : c.mms.ladder)
        if (lv.n < 4 || lv.n_steps < 1) err.emplace_back("mms.ladder entries need n >= 4 and n_steps >= 1");
    if (!(c.energy_tolerance_per_dt > 0.0)) err.emplace_back("energy.tolerance_per_dt must be > 0");
    for (std::size_t i = 0; i < c.lipschitz_epsilons.size(); ++i) {
        if (!(c.lipschitz_epsilons[i] > 0.0)) err.emplace_back("lipschitz.epsilons must be positive");
        else if (i > 0 && !(c.lipschitz_epsilons[i] < c.lipschitz_epsilons[i - 1]))
            err.emplace_back("lipschitz.epsilons must be decreasing");
    }
    if (c.lipschitz_epsilons.empty()) err.emplace_back("lipschitz.epsilons must not be empty");
    if (!(c.lipschitz_max_variation >= 1.0)) err.emplace_back("lipschitz.max_variation must be >= 1");
    if (c.snapshot_every < 0) err.emplace_back("output.snapshot_every must be >= 0");
    if (c.output_dir.empty()) err.emplace_back("output.dir must not be empty");

    if (!err.empty()) throw ConfigError(std::move(err));
    return c;
}

/// The fully resolved configuration, every default spelled out.
inline nlohmann::json to_json(const RunConfig& c) {
    using nlohmann::json;
    json ladder = json::array();
    for (const auto& lv : c.mms.ladder) ladder.push_back({{"n", lv.n}, {"n_steps", lv.n_steps}});
    json center = json::array();
    for (double x : c.initial.center) center.push_back(x);
    return json{
        {"grid", {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"lx", c.grid.lx}, {"ly", c.grid.ly}}},
        {"time", {{"t_final", c.time.t_final}, {"n_steps", c.time.n_steps}}},
        {"phys",
         {{"rho", c.phys.rho}, {"nu", c.phys.nu}, {"beta", c.phys.beta}, {"gamma", c.phys.gamma}, {"b", c.phys.b},
          {"quasi_incompressible", c.phys.quasi_incompressible}}},
        {"initial",
         {{"kind", c.initial.kind}, {"amplitude", c.initial.amplitude}, {"pressure", c.initial.pressure},
          {"center", center}, {"width", c.initial.width}, {"velocity_x", c.initial.velocity_x},
          {"velocity_y", c.initial.velocity_y}, {"pressure_file", c.initial.pressure_file}}},
        {"cost",
         {{"weights",
           {{"kappa1", c.weights.kappa1}, {"kappa2", c.weights.kappa2}, {"kappa3", c.weights.kappa3},
            {"varkappa1", c.weights.varkappa1}, {"varkappa2", c.weights.varkappa2}, {"lambda1", c.weights.lambda1},
            {"lambda2", c.weights.lambda2}}},
          {"targets",
           {{"kind", c.targets.kind}, {"amplitude", c.targets.amplitude}, {"velocity_x", c.targets.velocity_x},
            {"velocity_y", c.targets.velocity_y}, {"pressure", c.targets.pressure}}}}},
        {"control",
         {{"init", c.control.init}, {"amplitude", c.control.amplitude}, {"file_x", c.control.file_x},
          {"file_y", c.control.file_y}}},
        {"optimizer",
         {{"method", c.optimizer.method == DescentMethod::LBFGS ? "lbfgs" : "steepest_descent"},
          {"max_iterations", c.optimizer.max_iterations}, {"grad_tol", c.optimizer.grad_tol},
          {"armijo", c.optimizer.armijo}, {"backtrack", c.optimizer.backtrack},
          {"max_backtracks", c.optimizer.max_backtracks}, {"memory", c.optimizer.memory},
          {"target_reduction", c.target_reduction}}},
        {"gradcheck",
         {{"n_directions", c.gradcheck.n_directions}, {"threshold", c.gradcheck.threshold},
          {"consistency_threshold", c.gradcheck.consistency_threshold}}},
        {"mms", {{"case", c.mms.case_name}, {"ladder", ladder}, {"min_slope", c.mms.min_slope}}},
        {"energy", {{"tolerance_per_dt", c.energy_tolerance_per_dt}}},
        {"lipschitz", {{"epsilons", c.lipschitz_epsilons}, {"max_variation", c.lipschitz_max_variation}}},
        {"output", {{"dir", c.output_dir}, {"snapshot_every", c.snapshot_every}, {"vtk", c.vtk}}},
    };
}

}  // namespace semicomp
