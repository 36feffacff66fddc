#include "cpd/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace cpd {
namespace {

std::string trim(const std::string& s) {
    auto first = s.find_first_not_of(" \t\r");
    auto last = s.find_last_not_of(" \t\r");
    return first == std::string::npos ? "" : s.substr(first, last - first + 1);
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "' has a non-numeric value '" + value + "'");
    }
}

} // namespace

void Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path.string());

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;

        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        " is not 'section.key = value'");
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));

        if (key == "detector.k") detector.k = static_cast<int>(parse_number(key, value));
        else if (key == "detector.l_min") detector.l_min = static_cast<int>(parse_number(key, value));
        else if (key == "detector.l_max") detector.l_max = static_cast<int>(parse_number(key, value));
        else if (key == "detector.epsilon") detector.epsilon = parse_number(key, value);
        else if (key == "detector.t0") detector.t0 = parse_number(key, value);
        else if (key == "detector.dt") detector.dt = parse_number(key, value);
        else if (key == "generator.feret_min") generator.feret_min = parse_number(key, value);
        else if (key == "generator.feret_max") generator.feret_max = parse_number(key, value);
        else if (key == "generator.dist_min") generator.dist_min = parse_number(key, value);
        else if (key == "generator.dist_max") generator.dist_max = parse_number(key, value);
        else if (key == "generator.rot_min") generator.rot_min = parse_number(key, value);
        else if (key == "generator.rot_max") generator.rot_max = parse_number(key, value);
        else if (key == "generator.image_size") generator.image_size = static_cast<int>(parse_number(key, value));
        else if (key == "generator.seed") generator.seed = static_cast<std::uint64_t>(parse_number(key, value));
        else if (key == "eval.theta") eval_theta = static_cast<int>(parse_number(key, value));
        else if (key == "eval.theta_min") eval_theta_min = static_cast<int>(parse_number(key, value));
        else if (key == "eval.theta_max") eval_theta_max = static_cast<int>(parse_number(key, value));
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

std::map<std::string, std::string> Config::detector_entries() const {
    auto fmt = [](double v) {
        std::ostringstream os;
        os << v;
        return os.str();
    };
    return {{"k", std::to_string(detector.k)},
            {"l_min", std::to_string(detector.l_min)},
            {"l_max", std::to_string(detector.l_max)},
            {"epsilon", fmt(detector.epsilon)},
            {"t0", detector.t0 > 0.0 ? fmt(detector.t0) : "auto"},
            {"dt", detector.dt > 0.0 ? fmt(detector.dt) : "auto"}};
}

} // namespace cpd
