// Copyright 2026 The langevin-kl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "langevin_kl/errors.hpp"
#include "langevin_kl/experiment.hpp"

namespace langevin
{
    namespace
    {
        using nlohmann::json;

        [[noreturn]] void bad(const std::string &key, const std::string &why)
        {
            throw Error("config: '" + key + "' " + why);
        }

        void reject_unknown(const json &obj, const std::set<std::string> &known, const std::string &where)
        {
            for (auto it = obj.begin(); it != obj.end(); ++it)
                if (!known.count(it.key()))
                    bad(where + it.key(), "is not a recognized key");
        }

        double number(const json &obj, const std::string &key, const std::string &where)
        {
            if (!obj.contains(key))
                bad(where + key, "is required");
            const json &v = obj.at(key);
            if (!v.is_number())
                bad(where + key, "must be a number");
            return v.get<double>();
        }

        double positive(const json &obj, const std::string &key, const std::string &where)
        {
            const double v = number(obj, key, where);
            if (!(v > 0.0) || !std::isfinite(v))
                bad(where + key, "must be a positive finite number");
            return v;
        }

        std::uint64_t positive_integer(const json &obj, const std::string &key, const std::string &where)
        {
            if (!obj.contains(key))
                bad(where + key, "is required");
            const json &v = obj.at(key);
            if (!v.is_number_integer() || v.get<long long>() < 1)
                bad(where + key, "must be a positive integer");
            return v.get<std::uint64_t>();
        }

        std::vector<double> numbers(const json &obj, const std::string &key, const std::string &where)
        {
            if (!obj.contains(key))
                bad(where + key, "is required");
            const json &v = obj.at(key);
            if (!v.is_array())
                bad(where + key, "must be an array of numbers");
            std::vector<double> out;
            for (const auto &e : v)
            {
                if (!e.is_number())
                    bad(where + key, "must be an array of numbers");
                out.push_back(e.get<double>());
            }
            return out;
        }

        WeakValue weak_value(const json &obj, const std::string &key, bool allow_inf)
        {
            const std::string where = "weak.";
            if (!obj.contains(key))
                bad(where + key, "is required in the weak regime (a number or \"estimate\")");
            const json &v = obj.at(key);
            if (v.is_string())
            {
                const auto s = v.get<std::string>();
                if (s == "estimate")
                    return {};
                if (allow_inf && s == "inf")
                    return {std::numeric_limits<double>::infinity()};
                bad(where + key, "must be a number or \"estimate\"" + std::string(allow_inf ? " or \"inf\"" : ""));
            }
            if (!v.is_number() || !(v.get<double>() > 0.0))
                bad(where + key, "must be a positive number");
            return {v.get<double>()};
        }
    } // namespace

    RunConfig parse_run_config(const std::string &text)
    {
        json root;
        try
        {
            root = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw Error(std::string("config: not valid JSON: ") + e.what());
        }
        if (!root.is_object())
            throw Error("config: top level must be an object");
        reject_unknown(root,
                       {"potential", "init", "regime", "epsilon", "n_chains", "seed", "record_every", "max_steps",
                        "weak", "oracles", "grid", "output"},
                       "");

        RunConfig cfg;

        if (!root.contains("potential") || !root["potential"].is_object())
            bad("potential", "section is required");
        const json &pot = root["potential"];
        reject_unknown(pot, {"kind", "params", "dim"}, "potential.");
        if (!pot.contains("kind") || !pot["kind"].is_string())
            bad("potential.kind", "must be a string");
        cfg.potential.kind = pot["kind"].get<std::string>();
        cfg.potential.params = numbers(pot, "params", "potential.");
        cfg.potential.dim = pot.contains("dim") ? Index(positive_integer(pot, "dim", "potential.")) : 1;

        if (root.contains("init"))
        {
            const json &in = root["init"];
            if (!in.is_object() || !in.contains("kind") || !in["kind"].is_string())
                bad("init.kind", "must be a string");
            reject_unknown(in, {"kind", "mean", "var", "x"}, "init.");
            cfg.init.kind = in["kind"].get<std::string>();
            if (cfg.init.kind == "gaussian")
            {
                cfg.init.mean = numbers(in, "mean", "init.");
                cfg.init.var = numbers(in, "var", "init.");
                for (double v : cfg.init.var)
                    if (!(v > 0.0))
                        bad("init.var", "entries must be positive");
            }
            else if (cfg.init.kind == "point")
                cfg.init.x = numbers(in, "x", "init.");
            else if (cfg.init.kind != "gaussian_1_over_m")
                bad("init.kind", "must be gaussian_1_over_m, gaussian or point");
        }

        if (root.contains("regime"))
        {
            if (!root["regime"].is_string())
                bad("regime", "must be a string");
            cfg.regime = root["regime"].get<std::string>();
        }
        if (cfg.regime != "strong" && cfg.regime != "weak" && cfg.regime != "halving")
            bad("regime", "must be strong, weak or halving");

        cfg.epsilon = positive(root, "epsilon", "");
        if (root.contains("n_chains"))
            cfg.n_chains = Index(positive_integer(root, "n_chains", ""));
        if (cfg.n_chains < 2)
            bad("n_chains", "must be at least 2");
        if (root.contains("seed"))
        {
            if (!root["seed"].is_number_unsigned())
                bad("seed", "must be a non-negative integer");
            cfg.seed = root["seed"].get<std::uint64_t>();
        }
        if (root.contains("record_every"))
            cfg.record_every = positive_integer(root, "record_every", "");
        if (root.contains("max_steps"))
            cfg.max_steps = positive_integer(root, "max_steps", "");

        if (cfg.regime == "weak")
        {
            if (!root.contains("weak") || !root["weak"].is_object())
                bad("weak", "section is required in the weak regime");
            const json &w = root["weak"];
            reject_unknown(w, {"c1", "c2", "h_prime", "kl0"}, "weak.");
            cfg.c1 = weak_value(w, "c1", false);
            cfg.c2 = weak_value(w, "c2", false);
            cfg.h_prime = weak_value(w, "h_prime", true);
            cfg.kl0 = weak_value(w, "kl0", false);
        }

        if (root.contains("oracles"))
        {
            const json &o = root["oracles"];
            if (!o.is_object())
                bad("oracles", "must be an object");
            reject_unknown(o, {"gaussian", "grid"}, "oracles.");
            for (const char *key : {"gaussian", "grid"})
                if (o.contains(key) && !o[key].is_boolean())
                    bad(std::string("oracles.") + key, "must be true or false");
            cfg.gaussian_oracle = o.value("gaussian", true);
            cfg.grid_oracle = o.value("grid", true);
        }

        if (root.contains("grid"))
        {
            const json &g = root["grid"];
            if (!g.is_object())
                bad("grid", "must be an object");
            reject_unknown(g, {"x_min", "x_max", "n"}, "grid.");
            GridSpec spec;
            spec.x_min = number(g, "x_min", "grid.");
            spec.x_max = number(g, "x_max", "grid.");
            spec.n = Index(positive_integer(g, "n", "grid."));
            if (!(spec.x_max > spec.x_min) || spec.n < 3)
                bad("grid", "needs x_min < x_max and n >= 3");
            cfg.grid = spec;
        }

        if (root.contains("output"))
        {
            if (!root["output"].is_string())
                bad("output", "must be a path string");
            cfg.output = root["output"].get<std::string>();
        }
        return cfg;
    }

    RunConfig load_run_config(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw Error("config: cannot open " + path.string());
        std::ostringstream os;
        os << in.rdbuf();
        return parse_run_config(os.str());
    }

} // namespace langevin
