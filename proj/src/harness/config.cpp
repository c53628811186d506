#include "mvr/harness/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mvr/core/error.hpp"

namespace mvr::harness {

using nlohmann::json;

void PipelineConfig::validate() const {
    if (resolutions.empty()) throw ConfigError("at least one resolution is required");
    if (resolutions.size() > 2) throw ConfigError("at most two resolutions (low and high) are supported");
    if (resolutions.size() == 2 && resolutions[0] == resolutions[1]) throw ConfigError("duplicate resolution");
    if (std::find(transforms.begin(), transforms.end(), TransformId::identity) == transforms.end()) {
        throw ConfigError("the identity transform must be configured");
    }
    fusion.validate();
    crf.validate();
    train.validate();
    if (!(sigma_z >= 0.0)) throw ConfigError("sigma_z must be >= 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");
    if (metric_grid < 1) throw ConfigError("metric_grid must be >= 1");
}

std::uint32_t PipelineConfig::lo_resolution() const {
    return *std::min_element(resolutions.begin(), resolutions.end());
}

std::uint32_t PipelineConfig::hi_resolution() const {
    return *std::max_element(resolutions.begin(), resolutions.end());
}

void PipelineConfig::set_seed(std::uint64_t s) {
    seed = s;
    train.seed = s;
}

PipelineConfig parse_config(const std::string& text) {
    PipelineConfig c;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    try {
        if (j.contains("resolutions")) c.resolutions = j["resolutions"].get<std::vector<std::uint32_t>>();
        if (j.contains("transforms")) {
            c.transforms.clear();
            for (const auto& t : j["transforms"]) c.transforms.push_back(parse_transform(t.get<std::string>()));
        }
        c.fusion.tau = j.value("tau", c.fusion.tau);
        c.fusion.epsilon = j.value("entropy_epsilon", c.fusion.epsilon);
        c.sigma_z = j.value("sigma_z", c.sigma_z);
        c.threshold = j.value("threshold", c.threshold);
        c.metric_grid = j.value("metric_grid", c.metric_grid);
        if (j.contains("crf")) {
            const auto& k = j["crf"];
            c.crf_enabled = k.value("enabled", c.crf_enabled);
            c.crf.iterations = k.value("iterations", c.crf.iterations);
            c.crf.w_gaussian = k.value("w_gaussian", c.crf.w_gaussian);
            c.crf.sigma_xy_gaussian = k.value("sigma_xy_gaussian", c.crf.sigma_xy_gaussian);
            c.crf.w_bilateral = k.value("w_bilateral", c.crf.w_bilateral);
            c.crf.sigma_xy_bilateral = k.value("sigma_xy_bilateral", c.crf.sigma_xy_bilateral);
            c.crf.sigma_rgb = k.value("sigma_rgb", c.crf.sigma_rgb);
            const auto mode = k.value("mode", std::string("approximate"));
            if (mode == "exact") {
                c.crf.mode = crf::CrfMode::exact;
            } else if (mode == "approximate") {
                c.crf.mode = crf::CrfMode::approximate;
            } else {
                throw ConfigError("crf.mode must be 'exact' or 'approximate'");
            }
        }
        if (j.contains("train")) {
            const auto& t = j["train"];
            c.train.hidden = t.value("hidden", c.train.hidden);
            c.train.lambda_dice = t.value("lambda_dice", c.train.lambda_dice);
            c.train.epsilon = t.value("epsilon", c.train.epsilon);
            c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
            c.train.epochs = t.value("epochs", c.train.epochs);
            c.train.batch_size = t.value("batch_size", c.train.batch_size);
            c.train.beta1 = t.value("beta1", c.train.beta1);
            c.train.beta2 = t.value("beta2", c.train.beta2);
            c.train.adam_epsilon = t.value("adam_epsilon", c.train.adam_epsilon);
            c.train.augment = t.value("augment", c.train.augment);
        }
        c.set_seed(j.value("seed", c.seed));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const PipelineConfig& c) {
    json j;
    j["resolutions"] = c.resolutions;
    json ts = json::array();
    for (auto t : c.transforms) ts.push_back(std::string(to_string(t)));
    j["transforms"] = ts;
    j["tau"] = c.fusion.tau;
    j["entropy_epsilon"] = c.fusion.epsilon;
    j["sigma_z"] = c.sigma_z;
    j["threshold"] = c.threshold;
    j["metric_grid"] = c.metric_grid;
    j["seed"] = c.seed;
    j["crf"] = {{"enabled", c.crf_enabled},
                {"iterations", c.crf.iterations},
                {"w_gaussian", c.crf.w_gaussian},
                {"sigma_xy_gaussian", c.crf.sigma_xy_gaussian},
                {"w_bilateral", c.crf.w_bilateral},
                {"sigma_xy_bilateral", c.crf.sigma_xy_bilateral},
                {"sigma_rgb", c.crf.sigma_rgb},
                {"mode", c.crf.mode == crf::CrfMode::exact ? "exact" : "approximate"}};
    j["train"] = {{"hidden", c.train.hidden},
                  {"lambda_dice", c.train.lambda_dice},
                  {"epsilon", c.train.epsilon},
                  {"learning_rate", c.train.learning_rate},
                  {"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"beta1", c.train.beta1},
                  {"beta2", c.train.beta2},
                  {"adam_epsilon", c.train.adam_epsilon},
                  {"augment", c.train.augment}};
    return j.dump(2) + "\n";
}

}  // namespace mvr::harness
