#include "anderloc/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace anderloc::config {

using nlohmann::json;

void KeyValues::add(const std::string& key, const std::string& value) {
    values_[key].push_back(value);
    order_.emplace_back(key, value);
}

bool KeyValues::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& KeyValues::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw std::invalid_argument("missing config key: " + key);
    return it->second.back();
}

std::vector<std::string> KeyValues::all(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? std::vector<std::string>{} : it->second;
}

std::string KeyValues::get_string(const std::string& key) const { return raw(key); }

std::string KeyValues::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

double KeyValues::get_double(const std::string& key) const {
    try {
        std::size_t pos = 0;
        double v = std::stod(raw(key), &pos);
        while (pos < raw(key).size() && std::isspace(static_cast<unsigned char>(raw(key)[pos]))) ++pos;
        if (pos != raw(key).size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw std::invalid_argument("config key " + key + " is not a number: '" + raw(key) + "'");
    }
}

double KeyValues::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long KeyValues::get_long(const std::string& key) const {
    double v = get_double(key);
    long l = static_cast<long>(v);
    if (static_cast<double>(l) != v)
        throw std::invalid_argument("config key " + key + " must be an integer");
    return l;
}

long KeyValues::get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

std::vector<double> KeyValues::get_doubles(const std::string& key) const {
    std::istringstream iss(raw(key));
    std::vector<double> out;
    std::string tok;
    while (iss >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            throw std::invalid_argument("config key " + key + " has a non-numeric entry: " + tok);
        }
    }
    if (out.empty()) throw std::invalid_argument("config key " + key + " is empty");
    return out;
}

KeyValues parse_spec_text(const std::string& text) {
    KeyValues kv;
    std::istringstream iss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(iss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("line " + std::to_string(lineno) + ": bad section header");
            section = line.substr(1, line.size() - 2);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t");
            auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
        kv.add(section.empty() ? key : section + "." + key, value);
    }
    return kv;
}

KeyValues parse_spec_file(const std::string& path) {
    std::ifstream ifs(path);
    if (!ifs) throw std::invalid_argument("cannot open spec file: " + path);
    std::ostringstream buf;
    buf << ifs.rdbuf();
    return parse_spec_text(buf.str());
}

model::ModelConfig model_from_spec(const KeyValues& kv) {
    model::ModelConfig mc;
    mc.d = static_cast<int>(kv.get_long("model.d", 1));
    mc.n = static_cast<int>(kv.get_long("model.n", 1));
    std::string mode = kv.get_string("model.mode", "lattice");
    if (mode == "lattice") {
        mc.mode = model::Mode::Lattice;
    } else if (mode == "continuum") {
        mc.mode = model::Mode::Continuum;
    } else {
        throw std::invalid_argument("model.mode must be lattice or continuum");
    }
    mc.h = kv.get_double("model.grid.h", 1.0);

    for (const auto& dom : kv.all("model.domain")) {
        std::istringstream iss(dom);
        std::vector<double> nums;
        double v;
        while (iss >> v) nums.push_back(v);
        if (static_cast<int>(nums.size()) != 2 * mc.d)
            throw std::invalid_argument("model.domain needs 2*d numbers (lo..., hi...)");
        grid::Box b;
        b.lo.resize(mc.d);
        b.hi.resize(mc.d);
        for (int c = 0; c < mc.d; ++c) {
            b.lo[c] = nums[c];
            b.hi[c] = nums[mc.d + c];
            if (!(b.lo[c] <= b.hi[c]))
                throw std::invalid_argument("model.domain box has lo > hi");
        }
        mc.domain.push_back(b);
    }
    if (mc.domain.empty()) throw std::invalid_argument("model.domain is required");

    std::string bg = kv.get_string("model.background", "none");
    if (bg == "none") {
        mc.background.kind = model::BackgroundSpec::Kind::Zero;
    } else if (bg == "constant") {
        mc.background.kind = model::BackgroundSpec::Kind::Constant;
        mc.background.amplitude = kv.get_double("model.background.amplitude", 0.0);
    } else if (bg == "cosine") {
        mc.background.kind = model::BackgroundSpec::Kind::Cosine;
        mc.background.amplitude = kv.get_double("model.background.amplitude", 0.0);
    } else {
        throw std::invalid_argument("model.background must be none, constant or cosine");
    }

    std::string shape = kv.get_string("model.single_site.shape", "box");
    if (shape == "box") mc.single_site.shape = model::SingleSiteProfile::Shape::Box;
    else if (shape == "tent") mc.single_site.shape = model::SingleSiteProfile::Shape::Tent;
    else if (shape == "smooth-bump") mc.single_site.shape = model::SingleSiteProfile::Shape::SmoothBump;
    else throw std::invalid_argument("model.single_site.shape must be box, tent or smooth-bump");
    mc.single_site.amplitude = kv.get_double("model.single_site.amplitude", 1.0);
    mc.single_site.r_u = kv.get_double("model.single_site.r_u", 0.5);

    std::string dens = kv.get_string("model.disorder.density", "uniform");
    if (dens == "uniform") mc.disorder.kind = model::DisorderDistribution::Kind::Uniform;
    else if (dens == "trunc-exp") mc.disorder.kind = model::DisorderDistribution::Kind::TruncExp;
    else throw std::invalid_argument("model.disorder.density must be uniform or trunc-exp");
    mc.disorder.eta_max = kv.get_double("model.disorder.eta_max", 1.0);

    std::string ik = kv.get_string("model.interaction.kind", "none");
    if (ik == "none") mc.interaction.kind = model::InteractionSpec::Kind::None;
    else if (ik == "exponential") mc.interaction.kind = model::InteractionSpec::Kind::Exponential;
    else if (ik == "polynomial") mc.interaction.kind = model::InteractionSpec::Kind::Polynomial;
    else if (ik == "hard-core") mc.interaction.kind = model::InteractionSpec::Kind::HardCore;
    else throw std::invalid_argument("model.interaction.kind unknown: " + ik);
    std::string sign = kv.get_string("model.interaction.sign", "repulsive");
    if (sign == "repulsive") mc.interaction.sign = model::InteractionSpec::Sign::Repulsive;
    else if (sign == "signed") mc.interaction.sign = model::InteractionSpec::Sign::Signed;
    else throw std::invalid_argument("model.interaction.sign must be repulsive or signed");
    mc.interaction.c_w = kv.get_double("model.interaction.c_w", 1.0);
    mc.interaction.mu_w = kv.get_double("model.interaction.mu_w", 1.0);
    mc.interaction.gamma_w = kv.get_double("model.interaction.gamma_w", 1.0);
    mc.interaction.p_w = kv.get_double("model.interaction.p_w", 2.0);
    mc.interaction.core_radius = kv.get_double("model.interaction.core_radius", 1.0);
    mc.alpha_w = kv.get_double("model.alpha_w", 0.0);
    return mc;
}

geometry::Configuration configuration_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("configuration JSON must be a nonempty array of arrays");
    const int n = static_cast<int>(j.size());
    const int d = static_cast<int>(j[0].size());
    Eigen::MatrixXd pts(d, n);
    for (int p = 0; p < n; ++p) {
        if (!j[p].is_array() || static_cast<int>(j[p].size()) != d)
            throw std::invalid_argument("configuration JSON rows must share one dimension");
        for (int c = 0; c < d; ++c) pts(c, p) = j[p][c].get<double>();
    }
    return geometry::Configuration(pts);
}

std::string configuration_to_json(const geometry::Configuration& c) {
    json j = json::array();
    for (int p = 0; p < c.n(); ++p) {
        json row = json::array();
        for (int cc = 0; cc < c.d(); ++cc) row.push_back(c.pts(cc, p));
        j.push_back(row);
    }
    return j.dump();
}

std::vector<std::pair<geometry::Configuration, geometry::Configuration>> pairs_from_json(
    const std::string& json_text) {
    json j = json::parse(json_text);
    if (!j.is_array()) throw std::invalid_argument("pairs JSON must be an array of [x,y] pairs");
    std::vector<std::pair<geometry::Configuration, geometry::Configuration>> out;
    for (const auto& pr : j) {
        if (!pr.is_array() || pr.size() != 2)
            throw std::invalid_argument("each pair must be [x, y]");
        out.emplace_back(configuration_from_json(pr[0].dump()),
                         configuration_from_json(pr[1].dump()));
    }
    return out;
}

} // namespace anderloc::config
