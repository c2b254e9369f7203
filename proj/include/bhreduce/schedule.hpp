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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace bhr {

/// Shortest decimal text that reads back to the same double.
inline std::string shortest(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Named parametric time schedule: "pow:g" -> t^g, "lin:a" -> a t,
/// "const:c" -> c. Used for both phi(t) and psi(t).
class Schedule {
public:
    enum class Form { power, linear, constant };

    constexpr Schedule() = default;
    constexpr Schedule(Form form, double param) : form_(form), param_(param) {}

    static constexpr Schedule power(double gamma) { return {Form::power, gamma}; }
    static constexpr Schedule linear(double a) { return {Form::linear, a}; }
    static constexpr Schedule constant(double c) { return {Form::constant, c}; }

    static Schedule parse(std::string_view text)
    {
        const auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw DomainError("schedule '" + std::string(text)
                              + "': expected pow:<g>, lin:<a> or const:<c>");
        const std::string head(text.substr(0, colon));
        const std::string tail(text.substr(colon + 1));
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(tail, &used);
            if (used != tail.size())
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw DomainError("schedule '" + std::string(text) + "': bad numeric parameter");
        }
        if (!std::isfinite(value))
            throw DomainError("schedule '" + std::string(text) + "': non-finite parameter");
        if (head == "pow")
            return power(value);
        if (head == "lin")
            return linear(value);
        if (head == "const")
            return constant(value);
        throw DomainError("schedule '" + std::string(text) + "': unknown form '" + head + "'");
    }

    double operator()(double t) const noexcept
    {
        switch (form_) {
        case Form::power:
            return std::pow(t, param_);
        case Form::linear:
            return param_ * t;
        case Form::constant:
            return param_;
        }
        return 0.0;
    }

    Form form() const noexcept { return form_; }
    double param() const noexcept { return param_; }

    /// Whether the schedule is o(t) and increasing, as the small-population
    /// event requires.
    bool is_sublinear_increasing() const noexcept
    {
        return form_ == Form::power && param_ > 0.0 && param_ < 1.0;
    }

    std::string to_string() const
    {
        const char* head = form_ == Form::power ? "pow" : form_ == Form::linear ? "lin" : "const";
        return std::string(head) + ":" + shortest(param_);
    }

    bool operator==(const Schedule&) const = default;

private:
    Form form_ = Form::power;
    double param_ = 0.5;
};

} // namespace bhr
