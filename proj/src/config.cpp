#include "jano/config.hpp"

#include <fstream>
#include <set>

#include "json.hpp"

#include "jano/suite.hpp"

namespace jano {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError("config error at " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) fail(path + "." + key, "unknown key");
}

const json& require(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) fail(path + "." + key, "missing required key");
    return j.at(key);
}

double get_num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

uint64_t get_uint(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<int64_t>() >= 0))
        fail(path, "expected a non-negative integer");
    return j.get<uint64_t>();
}

std::string get_str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

Region parse_region(const json& j, const std::string& path) {
    check_keys(j, path, {"box", "pattern", "amplitude", "freq", "period", "velocity"});
    Region r;
    const json& box = require(j, path, "box");
    if (!box.is_array() || box.size() != 6) fail(path + ".box", "expected [f0,f1,h0,h1,w0,w1]");
    r.f0 = static_cast<uint32_t>(get_uint(box[0], path + ".box[0]"));
    r.f1 = static_cast<uint32_t>(get_uint(box[1], path + ".box[1]"));
    r.h0 = static_cast<uint32_t>(get_uint(box[2], path + ".box[2]"));
    r.h1 = static_cast<uint32_t>(get_uint(box[3], path + ".box[3]"));
    r.w0 = static_cast<uint32_t>(get_uint(box[4], path + ".box[4]"));
    r.w1 = static_cast<uint32_t>(get_uint(box[5], path + ".box[5]"));
    try {
        r.kind = pattern_from_name(get_str(require(j, path, "pattern"), path + ".pattern"));
    } catch (const InvalidInputError& e) {
        fail(path + ".pattern", e.what());
    }
    r.amplitude = get_num(require(j, path, "amplitude"), path + ".amplitude");
    if (j.contains("freq")) r.freq = get_num(j.at("freq"), path + ".freq");
    if (j.contains("period")) r.period = static_cast<uint32_t>(get_uint(j.at("period"), path + ".period"));
    if (j.contains("velocity")) r.velocity = get_num(j.at("velocity"), path + ".velocity");
    return r;
}

SceneSpec parse_scene(const json& j, const std::string& path) {
    check_keys(j, path, {"channels", "frames", "height", "width", "regions", "seed"});
    SceneSpec s;
    s.channels = static_cast<uint32_t>(get_uint(require(j, path, "channels"), path + ".channels"));
    s.frames = static_cast<uint32_t>(get_uint(require(j, path, "frames"), path + ".frames"));
    s.height = static_cast<uint32_t>(get_uint(require(j, path, "height"), path + ".height"));
    s.width = static_cast<uint32_t>(get_uint(require(j, path, "width"), path + ".width"));
    if (j.contains("seed")) s.seed = get_uint(j.at("seed"), path + ".seed");
    const json& regions = require(j, path, "regions");
    if (!regions.is_array() || regions.empty()) fail(path + ".regions", "expected a non-empty array");
    for (size_t i = 0; i < regions.size(); ++i)
        s.regions.push_back(parse_region(regions[i], path + ".regions[" + std::to_string(i) + "]"));
    try {
        s.validate();
    } catch (const InvalidInputError& e) {
        fail(path, e.what());
    }
    return s;
}

AnalyzerConfig parse_analyzer(const json& j, const std::string& path, uint32_t frames) {
    check_keys(j, path, {"warmup_steps", "temporal_weight", "spatial_weight", "block"});
    AnalyzerConfig cfg;
    cfg.warmup_steps =
        static_cast<uint32_t>(get_uint(require(j, path, "warmup_steps"), path + ".warmup_steps"));
    const json& block = require(j, path, "block");
    if (!block.is_array() || block.size() != 3) fail(path + ".block", "expected [f,h,w]");
    cfg.block.f = static_cast<uint32_t>(get_uint(block[0], path + ".block[0]"));
    cfg.block.h = static_cast<uint32_t>(get_uint(block[1], path + ".block[1]"));
    cfg.block.w = static_cast<uint32_t>(get_uint(block[2], path + ".block[2]"));
    if (frames == 1) {
        cfg.temporal_weight = 0.0;
        cfg.spatial_weight = 1.0;
    }
    if (j.contains("temporal_weight"))
        cfg.temporal_weight = get_num(j.at("temporal_weight"), path + ".temporal_weight");
    if (j.contains("spatial_weight"))
        cfg.spatial_weight = get_num(j.at("spatial_weight"), path + ".spatial_weight");
    try {
        cfg.validate(frames);
    } catch (const InvalidInputError& e) {
        fail(path, e.what());
    }
    return cfg;
}

ScheduleConfig parse_schedule(const json& j, const std::string& path) {
    check_keys(j, path,
               {"total_steps", "warmup_steps", "cooldown_steps", "static_threshold",
                "static_interval", "moderate_threshold", "moderate_interval"});
    ScheduleConfig cfg;
    cfg.total_steps =
        static_cast<uint32_t>(get_uint(require(j, path, "total_steps"), path + ".total_steps"));
    cfg.warmup_steps =
        static_cast<uint32_t>(get_uint(require(j, path, "warmup_steps"), path + ".warmup_steps"));
    cfg.cooldown_steps = ScheduleConfig::default_cooldown(cfg.total_steps);
    if (j.contains("cooldown_steps"))
        cfg.cooldown_steps =
            static_cast<uint32_t>(get_uint(j.at("cooldown_steps"), path + ".cooldown_steps"));
    cfg.static_threshold =
        get_num(require(j, path, "static_threshold"), path + ".static_threshold");
    cfg.static_interval =
        static_cast<uint32_t>(get_uint(require(j, path, "static_interval"), path + ".static_interval"));
    cfg.moderate_threshold =
        get_num(require(j, path, "moderate_threshold"), path + ".moderate_threshold");
    cfg.moderate_interval = static_cast<uint32_t>(
        get_uint(require(j, path, "moderate_interval"), path + ".moderate_interval"));
    try {
        cfg.validate();
    } catch (const InvalidInputError& e) {
        fail(path, e.what());
    }
    return cfg;
}

DiTConfig parse_model(const json& j, const std::string& path, uint32_t channels) {
    check_keys(j, path, {"layers", "d_model", "heads", "ff_dim", "seed"});
    DiTConfig cfg;
    cfg.token_dim = channels;
    if (j.contains("layers")) cfg.layers = static_cast<uint32_t>(get_uint(j.at("layers"), path + ".layers"));
    if (j.contains("d_model"))
        cfg.d_model = static_cast<uint32_t>(get_uint(j.at("d_model"), path + ".d_model"));
    if (j.contains("heads")) cfg.heads = static_cast<uint32_t>(get_uint(j.at("heads"), path + ".heads"));
    if (j.contains("ff_dim")) cfg.ff_dim = static_cast<uint32_t>(get_uint(j.at("ff_dim"), path + ".ff_dim"));
    if (j.contains("seed")) cfg.seed = get_uint(j.at("seed"), path + ".seed");
    try {
        cfg.validate();
    } catch (const InvalidInputError& e) {
        fail(path, e.what());
    }
    return cfg;
}

}  // namespace

RunConfig RunConfig::parse_text(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    check_keys(j, origin,
               {"seed", "scene", "suite", "trajectory", "analyzer", "schedule", "model", "ablate",
                "constancy"});

    RunConfig cfg;
    if (j.contains("seed")) cfg.seed = get_uint(j.at("seed"), origin + ".seed");

    if (j.contains("scene")) cfg.scene = parse_scene(j.at("scene"), origin + ".scene");
    if (j.contains("suite")) {
        const json& s = j.at("suite");
        check_keys(s, origin + ".suite", {"preset", "count"});
        SuiteConfig sc;
        if (s.contains("preset")) sc.preset = get_str(s.at("preset"), origin + ".suite.preset");
        if (sc.preset != "standard" && sc.preset != "rollout")
            fail(origin + ".suite.preset", "expected \"standard\" or \"rollout\"");
        if (s.contains("count"))
            sc.count = static_cast<uint32_t>(get_uint(s.at("count"), origin + ".suite.count"));
        if (sc.count == 0) fail(origin + ".suite.count", "must be positive");
        cfg.suite = sc;
    }
    if (!cfg.scene && !cfg.suite) fail(origin + ".scene", "missing required key (or provide .suite)");

    if (j.contains("trajectory")) {
        const json& t = j.at("trajectory");
        check_keys(t, origin + ".trajectory", {"steps", "mode", "sigma_scale"});
        if (t.contains("steps"))
            cfg.trajectory.steps =
                static_cast<uint32_t>(get_uint(t.at("steps"), origin + ".trajectory.steps"));
        if (cfg.trajectory.steps < 2) fail(origin + ".trajectory.steps", "must be >= 2");
        if (t.contains("mode")) {
            const std::string m = get_str(t.at("mode"), origin + ".trajectory.mode");
            if (m == "interpolate")
                cfg.trajectory.mode = TrajectoryMode::Interpolate;
            else if (m == "oracle-rollout")
                cfg.trajectory.mode = TrajectoryMode::OracleRollout;
            else
                fail(origin + ".trajectory.mode", "expected \"interpolate\" or \"oracle-rollout\"");
        }
        if (t.contains("sigma_scale")) {
            cfg.trajectory.sigma_scale = get_num(t.at("sigma_scale"), origin + ".trajectory.sigma_scale");
            if (cfg.trajectory.sigma_scale < 0.0)
                fail(origin + ".trajectory.sigma_scale", "must be non-negative");
        }
    }

    const uint32_t frames = cfg.scene ? cfg.scene->frames : 8;
    const uint32_t channels = cfg.scene ? cfg.scene->channels : 16;
    if (j.contains("analyzer")) cfg.analyzer = parse_analyzer(j.at("analyzer"), origin + ".analyzer", frames);
    if (j.contains("schedule")) cfg.schedule = parse_schedule(j.at("schedule"), origin + ".schedule");
    if (j.contains("model")) cfg.model = parse_model(j.at("model"), origin + ".model", channels);

    if (j.contains("ablate")) {
        const json& a = j.at("ablate");
        check_keys(a, origin + ".ablate", {"mask_ratios"});
        const json& ratios = require(a, origin + ".ablate", "mask_ratios");
        if (!ratios.is_array() || ratios.empty())
            fail(origin + ".ablate.mask_ratios", "expected a non-empty array");
        cfg.ablate.mask_ratios.clear();
        for (size_t i = 0; i < ratios.size(); ++i) {
            const double r = get_num(ratios[i], origin + ".ablate.mask_ratios[" + std::to_string(i) + "]");
            if (r < 0.0 || r > 1.0)
                fail(origin + ".ablate.mask_ratios[" + std::to_string(i) + "]", "must be in [0, 1]");
            cfg.ablate.mask_ratios.push_back(r);
        }
    }

    if (j.contains("constancy")) {
        const json& c = j.at("constancy");
        check_keys(c, origin + ".constancy",
                   {"dimension", "separation", "trials", "grid_step", "grid_max"});
        if (c.contains("dimension"))
            cfg.constancy.dimension =
                static_cast<uint32_t>(get_uint(c.at("dimension"), origin + ".constancy.dimension"));
        if (c.contains("separation"))
            cfg.constancy.separation = get_num(c.at("separation"), origin + ".constancy.separation");
        if (c.contains("trials"))
            cfg.constancy.trials =
                static_cast<uint32_t>(get_uint(c.at("trials"), origin + ".constancy.trials"));
        if (c.contains("grid_step"))
            cfg.constancy.grid_step = get_num(c.at("grid_step"), origin + ".constancy.grid_step");
        if (c.contains("grid_max"))
            cfg.constancy.grid_max = get_num(c.at("grid_max"), origin + ".constancy.grid_max");
        if (cfg.constancy.dimension == 0) fail(origin + ".constancy.dimension", "must be positive");
        if (cfg.constancy.trials == 0) fail(origin + ".constancy.trials", "must be positive");
        if (cfg.constancy.grid_step <= 0.0 || cfg.constancy.grid_max > 0.9)
            fail(origin + ".constancy", "grid must have positive step and max <= 0.9");
    }
    return cfg;
}

RunConfig RunConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file " + path.string());
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_text(text, path.string());
}

std::vector<SceneSpec> RunConfig::resolve_scenes() const {
    if (scene) return {*scene};
    if (suite) {
        if (suite->preset == "rollout") return rollout_suite(suite->count, seed);
        return standard_suite(suite->count, seed);
    }
    throw ConfigError("config has neither scene nor suite");
}

const AnalyzerConfig& RunConfig::require_analyzer() const {
    if (!analyzer) throw ConfigError("config error at <config>.analyzer: missing required key");
    return *analyzer;
}

const ScheduleConfig& RunConfig::require_schedule() const {
    if (!schedule) throw ConfigError("config error at <config>.schedule: missing required key");
    return *schedule;
}

const DiTConfig& RunConfig::require_model() const {
    if (!model) throw ConfigError("config error at <config>.model: missing required key");
    return *model;
}

}  // namespace jano
