#include "mvr/harness/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "mvr/core/binary_io.hpp"
#include "mvr/core/error.hpp"
#include "mvr/views/views.hpp"

namespace mvr::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& root, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : root / path;
}

std::string relative_to(const fs::path& root, const fs::path& p) {
    if (p.is_relative()) return p.generic_string();
    return fs::relative(p, root).generic_string();
}

CaseRecord parse_record(const json& j, const fs::path& root) {
    CaseRecord c;
    c.case_id = j.at("case_id").get<std::string>();
    if (j.contains("patient_id") && !j["patient_id"].is_null()) c.patient_id = j["patient_id"].get<std::string>();
    if (j.contains("slice_index") && !j["slice_index"].is_null()) c.slice_index = j["slice_index"].get<int>();
    c.mask = resolve(root, j.at("mask").get<std::string>());
    if (j.contains("guide") && !j["guide"].is_null()) c.guide = resolve(root, j["guide"].get<std::string>());
    c.height = j.at("height").get<int>();
    c.width = j.at("width").get<int>();
    c.split = j.value("split", "");
    c.provenance = j.value("provenance", "");
    for (const auto& v : j.at("views")) {
        ViewEntry e;
        e.resolution = v.at("resolution").get<std::uint32_t>();
        e.transform = parse_transform(v.at("transform").get<std::string>());
        e.path = resolve(root, v.at("path").get<std::string>());
        c.views.push_back(std::move(e));
    }
    return c;
}

}  // namespace

const ViewEntry* CaseRecord::find_view(std::uint32_t resolution, TransformId t) const {
    for (const auto& v : views) {
        if (v.resolution == resolution && v.transform == t) return &v;
    }
    return nullptr;
}

Manifest Manifest::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest '" + path.string() + "'");
    Manifest m;
    m.root = fs::absolute(path).parent_path();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            m.cases.push_back(parse_record(json::parse(line), m.root));
        } catch (const json::exception& e) {
            throw ConfigError("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    m.validate();
    return m;
}

void Manifest::save(const fs::path& path) const {
    std::string out;
    for (const auto& c : cases) {
        json j;
        j["case_id"] = c.case_id;
        if (c.patient_id) j["patient_id"] = *c.patient_id;
        if (c.slice_index) j["slice_index"] = *c.slice_index;
        j["mask"] = relative_to(root, c.mask);
        if (c.guide) j["guide"] = relative_to(root, *c.guide);
        j["height"] = c.height;
        j["width"] = c.width;
        if (!c.split.empty()) j["split"] = c.split;
        if (!c.provenance.empty()) j["provenance"] = c.provenance;
        json views = json::array();
        for (const auto& v : c.views) {
            views.push_back({{"resolution", v.resolution},
                             {"transform", std::string(to_string(v.transform))},
                             {"path", relative_to(root, v.path)}});
        }
        j["views"] = std::move(views);
        out += j.dump() + "\n";
    }
    io::write_text(path, out);
}

void Manifest::validate() const {
    std::set<std::string> ids;
    std::map<std::string, std::pair<int, int>> patient_shape;
    for (const auto& c : cases) {
        if (!ids.insert(c.case_id).second) throw ConfigError("duplicate case_id '" + c.case_id + "'");
        if (c.height < 1 || c.width < 1) throw ConfigError("case '" + c.case_id + "' has invalid size");
        if (!fs::exists(c.mask)) throw ConfigError("case '" + c.case_id + "': mask file missing");
        if (c.guide && !fs::exists(*c.guide)) throw ConfigError("case '" + c.case_id + "': guide file missing");
        for (const auto& v : c.views) {
            if (!fs::exists(v.path)) {
                throw MissingViewError("case '" + c.case_id + "': feature file for view " +
                                       views::describe({v.resolution, v.transform}) + " missing");
            }
        }
        if (c.patient_id) {
            const auto [it, fresh] = patient_shape.try_emplace(*c.patient_id, c.height, c.width);
            if (!fresh && it->second != std::make_pair(c.height, c.width)) {
                throw ConfigError("patient '" + *c.patient_id + "' has slices of different sizes");
            }
        }
    }
}

void Manifest::require_views(std::span<const std::uint32_t> resolutions,
                             std::span<const TransformId> transforms) const {
    for (const auto& c : cases) {
        for (auto r : resolutions) {
            for (auto t : transforms) {
                if (c.find_view(r, t) == nullptr) {
                    throw MissingViewError("case '" + c.case_id + "' lacks view " + views::describe({r, t}));
                }
            }
        }
    }
}

Manifest Manifest::filtered(const std::string& split) const {
    Manifest m;
    m.root = root;
    for (const auto& c : cases) {
        if (split.empty() || split == "all" || c.split == split) m.cases.push_back(c);
    }
    return m;
}

bool Manifest::volumetric() const {
    return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const auto& c) { return c.patient_id.has_value(); });
}

}  // namespace mvr::harness
