// SPDX-License-Identifier: MIT
#include "qdd/model.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace qdd {

const char* to_string(CaseLabel label) {
    switch (label) {
        case CaseLabel::I: return "I";
        case CaseLabel::II: return "II";
        case CaseLabel::III: return "III";
        case CaseLabel::IV: return "IV";
    }
    return "?";
}

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

ModelParams make_params(double lambda0, double lambda1, double lambda,
                        double c, double pi0) {
    require(std::isfinite(lambda0) && lambda0 > 0.0,
            "lambda0 must be a finite positive number");
    require(std::isfinite(lambda1) && lambda1 > 0.0,
            "lambda1 must be a finite positive number");
    require(std::isfinite(lambda) && lambda > 0.0,
            "lambda must be a finite positive number");
    require(std::isfinite(c) && c > 0.0, "c must be a finite positive number");
    require(std::isfinite(pi0) && pi0 >= 0.0 && pi0 <= 1.0,
            "pi0 must lie in [0,1]");
    require(lambda0 != lambda1,
            "lambda1 must differ from lambda0 (equal rates make the disorder unobservable)");
    return ModelParams{lambda0, lambda1, lambda, c, pi0};
}

ModelParams params_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");

    const char* keys[] = {"lambda0", "lambda1", "lambda", "c", "pi0"};
    double vals[5];
    for (int i = 0; i < 5; ++i) {
        if (!doc.contains(keys[i]))
            throw std::invalid_argument(std::string("config is missing field \"") + keys[i] + "\"");
        const auto& v = doc.at(keys[i]);
        if (!v.is_number())
            throw std::invalid_argument(std::string("config field \"") + keys[i] + "\" must be a number");
        vals[i] = v.get<double>();
        if (!std::isfinite(vals[i]))
            throw std::invalid_argument(std::string("config field \"") + keys[i] + "\" must be finite");
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known)
            throw std::invalid_argument("config has unknown field \"" + it.key() + "\"");
    }
    return make_params(vals[0], vals[1], vals[2], vals[3], vals[4]);
}

Thresholds thresholds(const ModelParams& p) {
    Thresholds t;
    t.b_bar = p.b_bar();
    if (p.lambda0 > p.lambda1) t.b_hat = p.b_hat();
    return t;
}

CaseLabel classify_case(const ModelParams& p) {
    if (p.lambda0 < p.lambda1) return CaseLabel::IV;
    // boundary cost separating the smooth- and broken-fit regimes
    const double c_star = 1.0 / p.lambda1 - 1.0 / p.lambda0 - p.lambda;
    const double tol = 1e-12 * std::max(1.0, p.c);
    if (std::abs(p.c - c_star) <= tol) return CaseLabel::II;
    return p.c > c_star ? CaseLabel::I : CaseLabel::III;
}

double likelihood_ratio(double x, const ModelParams& p) {
    if (!(x >= 0.0)) throw std::invalid_argument("x must be nonnegative");
    return std::exp(p.delta() * x);
}

std::optional<double> check_lemma31(double m0, double m1, bool dominates,
                                    double lambda, double c) {
    if (!(std::isfinite(m0) && m0 > 0.0))
        throw std::invalid_argument("m0 must be a finite positive number");
    if (!(std::isfinite(m1) && m1 > 0.0))
        throw std::invalid_argument("m1 must be a finite positive number");
    if (!dominates) return std::nullopt;
    const double d = m1 - m0;
    if (d > 0.0 && d <= c + lambda) return lambda / (lambda + c);
    return std::nullopt;
}

}  // namespace qdd
