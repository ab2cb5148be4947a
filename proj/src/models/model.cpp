#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "ripe/error.hpp"
#include "ripe/models.hpp"
#include "ripe/special.hpp"

namespace ripe {

std::string_view family_name(FamilyKind kind)
{
    switch (kind) {
    case FamilyKind::NormalMeanVar: return "normal";
    case FamilyKind::NormalMeanOnly: return "normal-mean";
    case FamilyKind::Binomial: return "binomial";
    case FamilyKind::Exponential: return "exponential";
    case FamilyKind::UniformScale: return "uniform";
    case FamilyKind::TwoLevelNormal: return "two-level";
    }
    return "unknown";
}

FamilyKind parse_family(std::string_view name)
{
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return c == '_' ? '-' : static_cast<char>(std::tolower(c));
    });
    if (s == "normal" || s == "normalmeanvar" || s == "normal-mean-var") {
        return FamilyKind::NormalMeanVar;
    }
    if (s == "normal-mean" || s == "normalmeanonly" || s == "normal-mean-only") {
        return FamilyKind::NormalMeanOnly;
    }
    if (s == "binomial" || s == "bernoulli") {
        return FamilyKind::Binomial;
    }
    if (s == "exponential") {
        return FamilyKind::Exponential;
    }
    if (s == "uniform" || s == "uniformscale" || s == "uniform-scale") {
        return FamilyKind::UniformScale;
    }
    if (s == "two-level" || s == "twolevelnormal" || s == "two-level-normal" || s == "hierarchical") {
        return FamilyKind::TwoLevelNormal;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown family '" + std::string(name) + "'", "family");
}

SufficientStats sufficient_stats(FamilyKind kind, std::span<const double> data)
{
    if (kind == FamilyKind::TwoLevelNormal) {
        throw Error(ErrorCode::InvalidArgument, "two-level data must be given as group means and sigmas",
                    "data");
    }
    if (data.empty()) {
        throw Error(ErrorCode::EmptyData, "no observations", "data");
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw Error(ErrorCode::InvalidObservation,
                        "observation " + std::to_string(i) + " is not finite", "data");
        }
    }
    const int n = static_cast<int>(data.size());
    switch (kind) {
    case FamilyKind::NormalMeanVar:
    case FamilyKind::NormalMeanOnly: {
        double mean = 0.0;
        for (double y : data) {
            mean += y;
        }
        mean /= n;
        double ss = 0.0;
        for (double y : data) {
            ss += (y - mean) * (y - mean);
        }
        return NormalStats{n, mean, ss / n};
    }
    case FamilyKind::Binomial: {
        int r = 0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data[i] != 0.0 && data[i] != 1.0) {
                throw Error(ErrorCode::InvalidObservation,
                            "binomial observation " + std::to_string(i) + " is not 0 or 1", "data");
            }
            r += data[i] == 1.0 ? 1 : 0;
        }
        return BinomialStats{n, r};
    }
    case FamilyKind::Exponential:
    case FamilyKind::UniformScale: {
        double sum = 0.0;
        double max = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!(data[i] > 0.0)) {
                throw Error(ErrorCode::InvalidObservation,
                            "observation " + std::to_string(i) + " must be positive", "data");
            }
            sum += data[i];
            max = std::max(max, data[i]);
        }
        if (kind == FamilyKind::Exponential) {
            return ExponentialStats{n, sum};
        }
        return UniformStats{n, max};
    }
    case FamilyKind::TwoLevelNormal: break;
    }
    throw Error(ErrorCode::InvalidArgument, "unsupported family");
}

ParamPoint Model::project_nuisance(const ParamPoint&, const ParamPoint&, KlDirection) const
{
    throw Error(ErrorCode::NoNuisance,
                std::string("family '") + std::string(family_name(kind_)) + "' has no nuisance parameter");
}

std::unique_ptr<Model> make_model(FamilyKind kind, const SufficientStats& stats, ModelConfig config)
{
    auto mismatch = [&]() {
        return Error(ErrorCode::InvalidArgument,
                     std::string("sufficient statistics do not match family '") +
                         std::string(family_name(kind)) + "'");
    };
    switch (kind) {
    case FamilyKind::NormalMeanVar:
    case FamilyKind::NormalMeanOnly:
        if (const auto* s = std::get_if<NormalStats>(&stats)) {
            return std::make_unique<NormalModel>(*s, kind == FamilyKind::NormalMeanOnly, config);
        }
        throw mismatch();
    case FamilyKind::Binomial:
        if (const auto* s = std::get_if<BinomialStats>(&stats)) {
            return std::make_unique<BinomialModel>(*s, config);
        }
        throw mismatch();
    case FamilyKind::Exponential:
        if (const auto* s = std::get_if<ExponentialStats>(&stats)) {
            return std::make_unique<ExponentialModel>(*s, config);
        }
        throw mismatch();
    case FamilyKind::UniformScale:
        if (const auto* s = std::get_if<UniformStats>(&stats)) {
            return std::make_unique<UniformModel>(*s, config);
        }
        throw mismatch();
    case FamilyKind::TwoLevelNormal:
        if (const auto* s = std::get_if<HierarchicalStats>(&stats)) {
            return std::make_unique<TwoLevelNormalModel>(*s, config);
        }
        throw mismatch();
    }
    throw mismatch();
}

}  // namespace ripe
