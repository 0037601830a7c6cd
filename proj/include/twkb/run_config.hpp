#pragma once

// JSON run configuration for the command-line tool.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "twkb/branches.hpp"
#include "twkb/errors.hpp"
#include "twkb/physics.hpp"

namespace twkb {

/// Malformed or inconsistent configuration (exit code 1).
class config_error : public invalid_argument {
public:
    using invalid_argument::invalid_argument;
};

struct RunConfig {
    PotentialModel potential = PotentialModel::linear(0.1, 100.0);
    double energy = 0.1;
    double a = -50.0, b = 50.0;
    std::vector<int> orders{0, 1, 2};
    std::size_t grid_points = 2001;
    double hbar_multiplier = 1.0;
    std::vector<double> lambda_samples{1.0, 0.5, 0.25, 0.125, 0.0625};
    double probe_x = 0.0;
    SignConvention sign_convention = SignConvention::lower;
    std::optional<double> rho_override;
    std::string output_dir = "out";
    double guard_band = 0.5;
    double inv_mass_scale = default_inv_mass_scale;

    PhysicalConfig physical() const {
        PhysicalConfig c;
        c.energy = energy;
        c.inv_mass_scale = inv_mass_scale;
        c.hbar_multiplier = hbar_multiplier;
        c.a = a;
        c.b = b;
        return c;
    }

    void validate() const {
        if (orders.empty()) throw config_error("no orders requested");
        for (int n : orders)
            if (n < 0 || n > 4) throw config_error("orders must lie in {0,1,2,3,4}");
        if (grid_points < 9 || grid_points % 2 == 0) throw config_error("grid_points must be odd and at least 9");
        if (!(a < b)) throw config_error("interval requires a < b");
        if (!(hbar_multiplier > 0.0)) throw config_error("hbar_multiplier must be positive");
        for (double l : lambda_samples)
            if (!(l > 0.0)) throw config_error("lambda samples must be positive");
        if (!(guard_band >= 0.0)) throw config_error("guard_band must be non-negative");
        if (!(inv_mass_scale > 0.0)) throw config_error("inv_mass_scale must be positive");
        if (rho_override && !(*rho_override > 0.0)) throw config_error("rho_override must be positive");
    }
};

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config field '") + key + "': " + e.what());
    }
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    using detail::json_get;
    if (!j.is_object()) throw config_error("config must be a JSON object");
    RunConfig c;

    if (!j.contains("potential")) throw config_error("config lacks 'potential'");
    const auto& p = j.at("potential");
    const auto type = json_get<std::string>(p, "type");
    if (type == "linear") {
        const double v0 = json_get<double>(p, "V0");
        const double d = json_get<double>(p, "d");
        if (d == 0.0) throw config_error("linear potential requires d != 0");
        c.potential = PotentialModel::linear(v0, d);
        c.a = -std::abs(d) / 2.0;
        c.b = std::abs(d) / 2.0;
    } else if (type == "polynomial") {
        auto coeffs = json_get<std::vector<double>>(p, "coefficients");
        if (coeffs.empty()) throw config_error("polynomial potential needs coefficients");
        c.potential = PotentialModel::polynomial(std::move(coeffs));
    } else {
        throw config_error("unknown potential type '" + type + "'");
    }

    c.energy = json_get<double>(j, "energy");
    if (j.contains("interval")) {
        const auto iv = json_get<std::vector<double>>(j, "interval");
        if (iv.size() != 2) throw config_error("interval must be [a, b]");
        c.a = iv[0];
        c.b = iv[1];
    } else if (type != "linear") {
        throw config_error("polynomial potential requires 'interval'");
    }
    if (j.contains("orders")) c.orders = json_get<std::vector<int>>(j, "orders");
    if (j.contains("grid_points")) c.grid_points = json_get<std::size_t>(j, "grid_points");
    if (j.contains("hbar_multiplier")) c.hbar_multiplier = json_get<double>(j, "hbar_multiplier");
    if (j.contains("lambda_samples")) c.lambda_samples = json_get<std::vector<double>>(j, "lambda_samples");
    if (j.contains("probe_x")) c.probe_x = json_get<double>(j, "probe_x");
    if (j.contains("sign_convention")) {
        const auto s = json_get<std::string>(j, "sign_convention");
        if (s == "lower") c.sign_convention = SignConvention::lower;
        else if (s == "upper") c.sign_convention = SignConvention::upper;
        else throw config_error("sign_convention must be 'lower' or 'upper'");
    }
    if (j.contains("rho_override") && !j.at("rho_override").is_null())
        c.rho_override = json_get<double>(j, "rho_override");
    if (j.contains("output_dir")) c.output_dir = json_get<std::string>(j, "output_dir");
    if (j.contains("guard_band")) c.guard_band = json_get<double>(j, "guard_band");
    if (j.contains("inv_mass_scale")) c.inv_mass_scale = json_get<double>(j, "inv_mass_scale");
    c.validate();
    return c;
}

inline RunConfig parse_run_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_run_config(j);
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot read config " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str());
}

}  // namespace twkb
