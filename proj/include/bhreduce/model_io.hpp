/*
   Copyright 2026 The bhreduce Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/


#pragma once

// JSON model files:
//   { "name": "...", "offspring": {"pmf": [...]},
//     "lifetime": {"kind": "lattice", "pmf": {"1": 0.5, "2": 0.5}}
//               | {"kind": "exponential", "rate": 1.0}
//               | {"kind": "uniform", "a": 0.5, "b": 1.5},
//     "oracle_mode": false }

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "models.hpp"

namespace bhr {

/// A model file as written, before the standing hypotheses are enforced.
struct ModelSpec {
    std::string name;
    std::vector<double> offspring_pmf;
    LifetimeSpec lifetime;
    bool oracle_mode = false;
};

inline ModelSpec parse_model_spec(const nlohmann::json& doc)
{
    try {
        ModelSpec spec;
        spec.name = doc.value("name", std::string("model"));
        spec.oracle_mode = doc.value("oracle_mode", false);
        spec.offspring_pmf = doc.at("offspring").at("pmf").get<std::vector<double>>();
        const auto& life = doc.at("lifetime");
        const auto kind = life.at("kind").get<std::string>();
        if (kind == "lattice") {
            LatticeLifetimeSpec l;
            for (const auto& [k, v] : life.at("pmf").items()) {
                std::size_t used = 0;
                const int ell = std::stoi(k, &used);
                if (used != k.size())
                    throw ModelError("lattice lifetime key '" + k + "' is not an integer");
                l.pmf[ell] = v.get<double>();
            }
            spec.lifetime = l;
        } else if (kind == "exponential") {
            spec.lifetime = ExponentialLifetimeSpec{life.at("rate").get<double>()};
        } else if (kind == "uniform") {
            spec.lifetime = UniformLifetimeSpec{life.at("a").get<double>(), life.at("b").get<double>()};
        } else {
            throw ModelError("unknown lifetime kind '" + kind + "'");
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed model file: ") + e.what());
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::out_of_range& e) {
        throw ModelError(std::string("malformed model file: ") + e.what());
    }
}

inline nlohmann::ordered_json to_json(const ModelSpec& spec)
{
    nlohmann::ordered_json doc;
    doc["name"] = spec.name;
    doc["offspring"]["pmf"] = spec.offspring_pmf;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            auto& life = doc["lifetime"];
            if constexpr (std::is_same_v<T, LatticeLifetimeSpec>) {
                life["kind"] = "lattice";
                life["pmf"] = nlohmann::ordered_json::object();
                for (const auto& [k, v] : s.pmf)
                    life["pmf"][std::to_string(k)] = v;
            } else if constexpr (std::is_same_v<T, ExponentialLifetimeSpec>) {
                life["kind"] = "exponential";
                life["rate"] = s.rate;
            } else {
                life["kind"] = "uniform";
                life["a"] = s.a;
                life["b"] = s.b;
            }
        },
        spec.lifetime);
    doc["oracle_mode"] = spec.oracle_mode;
    return doc;
}

inline ModelSpec load_model_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ModelError("cannot open model file " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError("model file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_model_spec(doc);
}

/// Validates the offspring and lifetime laws; throws ModelError on failure.
inline Model build_model(const ModelSpec& spec)
{
    return Model{spec.name, make_offspring(spec.offspring_pmf), make_lifetime(spec.lifetime, spec.oracle_mode),
                 spec.oracle_mode};
}

inline Model load_model(const std::filesystem::path& path) { return build_model(load_model_spec(path)); }

} // namespace bhr
