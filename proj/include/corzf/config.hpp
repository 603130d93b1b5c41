// SPDX-License-Identifier: Apache-2.0
//
// corzf - coordinated regularized zero-forcing precoding toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "corzf/sim_engine.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace corzf
{

using Json = nlohmann::ordered_json;

namespace detail
{

template <class E>
struct EnumNames;

template <>
struct EnumNames<Scheme>
{
    static constexpr std::pair<Scheme, const char *> table[] = {{Scheme::coord_rzf, "coord_rzf"},
                                                                {Scheme::coord_zf, "coord_zf"},
                                                                {Scheme::noncoord_rzf, "noncoord_rzf"},
                                                                {Scheme::single_cell, "single_cell"}};
};
template <>
struct EnumNames<Feedback>
{
    static constexpr std::pair<Feedback, const char *> table[] = {
        {Feedback::perfect, "perfect"}, {Feedback::rvq_exact, "rvq_exact"}, {Feedback::rvq_model, "rvq_model"}};
};
template <>
struct EnumNames<BitScheme>
{
    static constexpr std::pair<BitScheme, const char *> table[] = {
        {BitScheme::fixed, "fixed"},
        {BitScheme::adaptive, "adaptive"},
        {BitScheme::adaptive_zf, "adaptive_zf"},
        {BitScheme::uniform, "uniform"},
        {BitScheme::exhaustive_inst_se, "exhaustive_inst_se"},
        {BitScheme::exhaustive_inst_int, "exhaustive_inst_int"}};
};
template <>
struct EnumNames<RegKind>
{
    static constexpr std::pair<RegKind, const char *> table[] = {{RegKind::single_cell_avg, "single_cell_avg"},
                                                                 {RegKind::multicell_avg, "multicell_avg"},
                                                                 {RegKind::grid_opt, "grid_opt"},
                                                                 {RegKind::fixed, "fixed"}};
};
template <>
struct EnumNames<Rounding>
{
    static constexpr std::pair<Rounding, const char *> table[] = {{Rounding::floor_repair, "floor"},
                                                                  {Rounding::nearest_repair, "nearest"}};
};
template <>
struct EnumNames<ShadowingKind>
{
    static constexpr std::pair<ShadowingKind, const char *> table[] = {
        {ShadowingKind::real_normal, "real_normal"}, {ShadowingKind::cn_real_part, "cn_real_part"}};
};
template <>
struct EnumNames<Region>
{
    static constexpr std::pair<Region, const char *> table[] = {{Region::annulus, "cell_edge"},
                                                                {Region::full_cell, "full_cell"}};
};
template <>
struct EnumNames<CodebookMode>
{
    static constexpr std::pair<CodebookMode, const char *> table[] = {{CodebookMode::per_user, "per_user"},
                                                                      {CodebookMode::fixed, "fixed"}};
};

} // namespace detail

template <class E>
std::string enum_name(E e)
{
    for (const auto &[v, n] : detail::EnumNames<E>::table)
        if (v == e)
            return n;
    return "?";
}

template <class E>
E parse_enum(const std::string &field, const std::string &s)
{
    std::string options;
    for (const auto &[v, n] : detail::EnumNames<E>::table)
    {
        if (s == n)
            return v;
        options += options.empty() ? n : std::string(", ") + n;
    }
    throw ConfigError(field + ": unknown value '" + s + "' (expected one of " + options + ")");
}

namespace detail
{

class ObjectReader
{
  public:
    ObjectReader(const Json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j.is_object())
            throw ConfigError(path_ + ": expected an object");
    }

    ~ObjectReader() noexcept(false)
    {
        if (std::uncaught_exceptions() > 0)
            return;
        for (const auto &[key, value] : j_.items())
            if (!seen_.count(key))
                throw ConfigError(field(key) + ": unknown key");
    }

    std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    template <class T>
    void get(const std::string &key, T &out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        try
        {
            out = j_.at(key).get<T>();
        }
        catch (const nlohmann::json::exception &)
        {
            throw ConfigError(field(key) + ": wrong type");
        }
    }

    template <class E>
    void get_enum(const std::string &key, E &out)
    {
        seen_.insert(key);
        if (!j_.contains(key))
            return;
        if (!j_.at(key).is_string())
            throw ConfigError(field(key) + ": expected a string");
        out = parse_enum<E>(field(key), j_.at(key).get<std::string>());
    }

    const Json *child(const std::string &key)
    {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

  private:
    const Json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline std::vector<double> parse_sweep(const Json &j, const std::string &field)
{
    if (j.is_array())
    {
        std::vector<double> v;
        for (const auto &x : j)
        {
            if (!x.is_number())
                throw ConfigError(field + ": expected numbers");
            v.push_back(x.get<double>());
        }
        return v;
    }
    double start = 0, stop = 0, step = 0;
    {
        ObjectReader r(j, field);
        r.get("start", start);
        r.get("stop", stop);
        r.get("step", step);
    }
    if (!(step > 0) || stop < start)
        throw ConfigError(field + ": need step > 0 and stop >= start");
    std::vector<double> v;
    const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9));
    for (int i = 0; i <= n; ++i)
        v.push_back(start + i * step);
    return v;
}

} // namespace detail

/// Builds a config from JSON. Unknown keys are rejected; absent keys keep
/// their defaults. The result is validated.
inline ExperimentConfig config_from_json(const Json &j)
{
    ExperimentConfig c;
    {
        detail::ObjectReader r(j, "");
        r.get("name", c.name);
        r.get("layout", c.layout);
        r.get("K", c.K);
        r.get("L", c.L);
        r.get("M", c.M);
        r.get("C", c.C);
        r.get("radius_m", c.radius_m);
        if (const Json *a = r.child("annulus_m"))
        {
            if (!a->is_array() || a->size() != 2 || !(*a)[0].is_number() || !(*a)[1].is_number())
                throw ConfigError("annulus_m: expected [d_min, d_max]");
            c.annulus_min_m = (*a)[0].get<double>();
            c.annulus_max_m = (*a)[1].get<double>();
        }
        r.get("wedge_deg", c.wedge_deg);
        r.get("full_cell_min_m", c.full_cell_min_m);
        r.get_enum("user_region", c.user_region);
        r.get("pathloss_exponent", c.pathloss_exponent);
        r.get("shadowing_db", c.shadowing_db);
        r.get_enum("shadowing", c.shadowing_kind);
        r.get("sectors", c.sectors);
        r.get_enum("codebook", c.codebook);
        if (const Json *s = r.child("rho0_db"))
            c.rho0_db = detail::parse_sweep(*s, "rho0_db");
        r.get("trials", c.trials);
        r.get("seed", c.seed);
        if (const Json *list = r.child("series"))
        {
            if (!list->is_array())
                throw ConfigError("series: expected an array");
            for (std::size_t i = 0; i < list->size(); ++i)
            {
                const std::string path = "series[" + std::to_string(i) + "]";
                SeriesConfig s;
                detail::ObjectReader sr((*list)[i], path);
                sr.get("label", s.label);
                sr.get_enum("scheme", s.scheme);
                sr.get_enum("feedback", s.feedback);
                sr.get("overlay", s.overlay);
                sr.get("K", s.K);
                sr.get("C", s.C);
                if (const Json *reg = sr.child("reg"))
                {
                    detail::ObjectReader rr(*reg, path + ".reg");
                    rr.get_enum("kind", s.reg.kind);
                    rr.get("alpha", s.reg.fixed_alpha);
                    rr.get("grid_min", s.reg.grid_min);
                    rr.get("grid_max", s.reg.grid_max);
                    rr.get("grid_points", s.reg.grid_points);
                }
                if (const Json *bits = sr.child("bits"))
                {
                    detail::ObjectReader br(*bits, path + ".bits");
                    br.get_enum("scheme", s.bits.scheme);
                    br.get("per_link", s.bits.per_link);
                    br.get("total", s.bits.total);
                    br.get_enum("rounding", s.bits.rounding);
                }
                c.series.push_back(s);
            }
        }
    }
    c.validate();
    return c;
}

/// Full JSON form with every default written out.
inline Json config_to_json(const ExperimentConfig &c)
{
    Json j;
    j["name"] = c.name;
    j["layout"] = c.layout;
    j["K"] = c.K;
    j["L"] = c.L;
    j["M"] = c.M;
    j["C"] = c.C;
    j["radius_m"] = c.radius_m;
    j["annulus_m"] = {c.annulus_min_m, c.annulus_max_m};
    j["wedge_deg"] = c.wedge_deg;
    j["full_cell_min_m"] = c.full_cell_min_m;
    j["user_region"] = enum_name(c.user_region);
    j["pathloss_exponent"] = c.pathloss_exponent;
    j["shadowing_db"] = c.shadowing_db;
    j["shadowing"] = enum_name(c.shadowing_kind);
    j["sectors"] = c.sectors;
    j["codebook"] = enum_name(c.codebook);
    j["rho0_db"] = c.rho0_db;
    j["trials"] = c.trials;
    j["seed"] = c.seed;
    j["series"] = Json::array();
    for (const auto &s : c.series)
    {
        Json x;
        x["label"] = s.label;
        x["scheme"] = enum_name(s.scheme);
        x["feedback"] = enum_name(s.feedback);
        x["overlay"] = s.overlay;
        x["K"] = c.K_of(s);
        x["C"] = c.C_of(s);
        x["reg"] = {{"kind", enum_name(s.reg.kind)},
                    {"alpha", s.reg.fixed_alpha},
                    {"grid_min", s.reg.grid_min},
                    {"grid_max", s.reg.grid_max},
                    {"grid_points", s.reg.grid_points}};
        x["bits"] = {{"scheme", enum_name(s.bits.scheme)},
                     {"per_link", s.bits.per_link},
                     {"total", s.bits.total},
                     {"rounding", enum_name(s.bits.rounding)}};
        j["series"].push_back(x);
    }
    return j;
}

inline ExperimentConfig parse_config_text(const std::string &text)
{
    Json j;
    try
    {
        j = Json::parse(text);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig parse_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace corzf
