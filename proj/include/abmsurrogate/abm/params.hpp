#pragma once

#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/text.hpp>

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>

namespace abmsurrogate::abm {

inline constexpr std::size_t kPolicyCount = 10;

struct PolicyParameterInfo {
    std::string_view name;
    std::string_view description;
    double defaultValue;
    double lower;
    double upper;
};

/// The ten policy parameters with their defaults and study ranges, in canonical order.
inline constexpr std::array<PolicyParameterInfo, kPolicyCount> kPolicyTable{{
    {"ageingParentsMoveInWithKids", "Probability agents move back in with adult children", 0.1, 0.1, 0.8},
    {"baseCareProb", "Base probability used for care provision functions", 0.0002, 0.0002, 0.0016},
    {"retiredHours", "Hours of care provided by retired agents", 60.0, 40.0, 80.0},
    {"ageOfRetirement", "Age of retirement for working agents", 65.0, 55.0, 75.0},
    {"personCareProb", "General individual probability of requiring care", 0.0008, 0.0002, 0.0016},
    {"maleAgeCareScaling", "Scaling factor for likelihood of care need for males", 18.0, 10.0, 25.0},
    {"femaleAgeCareScaling", "Scaling factor for likelihood of care need for females", 19.0, 10.0, 25.0},
    {"childHours", "Hours of care provided by children living at home", 5.0, 1.0, 10.0},
    {"homeAdultHours", "Hours of care provided by unemployed adults", 30.0, 5.0, 50.0},
    {"workingAdultHours", "Hours of care provided by employed adults", 25.0, 5.0, 40.0},
}};

/// Constants of the demographic and care rules. Loaded from a `key = value`
/// file; every field has a documented default (see config/demography.cfg).
struct DemographyConfig {
    // initial population
    int initialCouples = 375;
    int initialAgeMin = 20;
    int initialAgeMax = 35;
    // life course
    int adultAge = 18;
    int maxAge = 110;
    // Gompertz mortality: q(age) = mortalityBase * exp(mortalityGrowth * age)
    double mortalityBase = 4.0e-5;
    double mortalityGrowth = 0.092;
    double maleMortalityFactor = 1.25;
    double careNeedMortalityFactor = 0.25;  // hazard multiplier per care-need level
    double infantMortality = 0.01;
    // fertility (partnered women only)
    double fertilityProb = 0.118;
    int fertilityMinAge = 17;
    int fertilityMaxAge = 42;
    // partnerships
    double partnershipProb = 0.4;
    int partnershipMaxAge = 60;
    double dissolutionProb = 0.01;
    // domestic migration
    double migrationProb = 0.02;
    // employment
    double initialEmploymentProb = 0.85;
    double unemploymentProb = 0.05;
    double reemploymentProb = 0.3;
    // care supply
    int childCareMinAge = 10;
    int carerMaxNeedLevel = 1;
    double willingnessScale = 500.0;
    double unwillingFraction = 0.5;
    // cost accounting
    double hourlyCareCost = 15.0;

    friend bool operator==(const DemographyConfig&, const DemographyConfig&) = default;

    static DemographyConfig from(const KeyValueConfig& kv) {
        DemographyConfig c;
        auto num = [&](const char* key, auto& field) {
            using T = std::remove_reference_t<decltype(field)>;
            if (kv.contains(key)) field = static_cast<T>(kv.get_number(key, static_cast<double>(field)));
        };
        num("initialCouples", c.initialCouples);
        num("initialAgeMin", c.initialAgeMin);
        num("initialAgeMax", c.initialAgeMax);
        num("adultAge", c.adultAge);
        num("maxAge", c.maxAge);
        num("mortalityBase", c.mortalityBase);
        num("mortalityGrowth", c.mortalityGrowth);
        num("maleMortalityFactor", c.maleMortalityFactor);
        num("careNeedMortalityFactor", c.careNeedMortalityFactor);
        num("infantMortality", c.infantMortality);
        num("fertilityProb", c.fertilityProb);
        num("fertilityMinAge", c.fertilityMinAge);
        num("fertilityMaxAge", c.fertilityMaxAge);
        num("partnershipProb", c.partnershipProb);
        num("partnershipMaxAge", c.partnershipMaxAge);
        num("dissolutionProb", c.dissolutionProb);
        num("migrationProb", c.migrationProb);
        num("initialEmploymentProb", c.initialEmploymentProb);
        num("unemploymentProb", c.unemploymentProb);
        num("reemploymentProb", c.reemploymentProb);
        num("childCareMinAge", c.childCareMinAge);
        num("carerMaxNeedLevel", c.carerMaxNeedLevel);
        num("willingnessScale", c.willingnessScale);
        num("unwillingFraction", c.unwillingFraction);
        num("hourlyCareCost", c.hourlyCareCost);
        for (const auto& [key, value] : kv.entries()) {
            if (!c.knows(key)) throw DataError("unknown demography key '" + key + "'");
        }
        c.validate();
        return c;
    }

    static DemographyConfig load(const std::string& path) { return from(KeyValueConfig::load(path)); }

    void validate() const {
        auto prob = [](double p, const char* name) {
            require(p >= 0.0 && p <= 1.0, std::string(name) + " must lie in [0,1]");
        };
        prob(mortalityBase, "mortalityBase");
        prob(infantMortality, "infantMortality");
        prob(fertilityProb, "fertilityProb");
        prob(partnershipProb, "partnershipProb");
        prob(dissolutionProb, "dissolutionProb");
        prob(migrationProb, "migrationProb");
        prob(initialEmploymentProb, "initialEmploymentProb");
        prob(unemploymentProb, "unemploymentProb");
        prob(reemploymentProb, "reemploymentProb");
        prob(unwillingFraction, "unwillingFraction");
        require(initialCouples >= 0, "initialCouples must be >= 0");
        require(initialAgeMin >= 0 && initialAgeMin <= initialAgeMax, "invalid initial age range");
        require(adultAge > 0 && maxAge > adultAge, "invalid adult/max age");
        require(mortalityGrowth >= 0.0 && maleMortalityFactor >= 0.0 && careNeedMortalityFactor >= 0.0,
                "mortality factors must be >= 0");
        require(willingnessScale >= 0.0, "willingnessScale must be >= 0");
        require(hourlyCareCost >= 0.0, "hourlyCareCost must be >= 0");
        require(carerMaxNeedLevel >= 0 && carerMaxNeedLevel <= 4, "carerMaxNeedLevel must lie in [0,4]");
    }

private:
    static bool knows(const std::string& key) {
        static constexpr std::array<std::string_view, 25> keys{
            "initialCouples", "initialAgeMin", "initialAgeMax", "adultAge", "maxAge",
            "mortalityBase", "mortalityGrowth", "maleMortalityFactor", "careNeedMortalityFactor",
            "infantMortality", "fertilityProb", "fertilityMinAge", "fertilityMaxAge",
            "partnershipProb", "partnershipMaxAge", "dissolutionProb", "migrationProb",
            "initialEmploymentProb", "unemploymentProb", "reemploymentProb", "childCareMinAge",
            "carerMaxNeedLevel", "willingnessScale", "unwillingFraction", "hourlyCareCost"};
        return std::find(keys.begin(), keys.end(), key) != keys.end();
    }
};

/// Input point of one simulation run: the ten policy parameters plus the
/// fixed model constants.
struct SimParams {
    double ageingParentsMoveInWithKids = kPolicyTable[0].defaultValue;
    double baseCareProb = kPolicyTable[1].defaultValue;
    double retiredHours = kPolicyTable[2].defaultValue;
    double ageOfRetirement = kPolicyTable[3].defaultValue;
    double personCareProb = kPolicyTable[4].defaultValue;
    double maleAgeCareScaling = kPolicyTable[5].defaultValue;
    double femaleAgeCareScaling = kPolicyTable[6].defaultValue;
    double childHours = kPolicyTable[7].defaultValue;
    double homeAdultHours = kPolicyTable[8].defaultValue;
    double workingAdultHours = kPolicyTable[9].defaultValue;

    int startYear = 1860;
    int endYear = 2050;
    DemographyConfig demography{};

    friend bool operator==(const SimParams&, const SimParams&) = default;

    [[nodiscard]] std::array<double, kPolicyCount> policy_values() const {
        return {ageingParentsMoveInWithKids, baseCareProb, retiredHours, ageOfRetirement, personCareProb,
                maleAgeCareScaling, femaleAgeCareScaling, childHours, homeAdultHours, workingAdultHours};
    }

    /// Builds parameters without range checks. Only the physical invariants
    /// (probabilities in [0,1], non-negative hours) are enforced.
    static SimParams unchecked(std::span<const double> values, DemographyConfig demography = {}) {
        require(values.size() == kPolicyCount, "expected 10 policy values");
        SimParams p;
        p.ageingParentsMoveInWithKids = values[0];
        p.baseCareProb = values[1];
        p.retiredHours = values[2];
        p.ageOfRetirement = values[3];
        p.personCareProb = values[4];
        p.maleAgeCareScaling = values[5];
        p.femaleAgeCareScaling = values[6];
        p.childHours = values[7];
        p.homeAdultHours = values[8];
        p.workingAdultHours = values[9];
        p.demography = demography;
        p.validate();
        return p;
    }

    /// Builds parameters that must lie inside the canonical study ranges.
    static SimParams checked(std::span<const double> values, DemographyConfig demography = {}) {
        require(values.size() == kPolicyCount, "expected 10 policy values");
        for (std::size_t i = 0; i < kPolicyCount; ++i) {
            const auto& info = kPolicyTable[i];
            require(values[i] >= info.lower && values[i] <= info.upper,
                    std::string(info.name) + " = " + format_number(values[i]) + " outside [" +
                        format_number(info.lower) + ", " + format_number(info.upper) + "]");
        }
        return unchecked(values, demography);
    }

    void validate() const {
        for (double v : policy_values()) require(std::isfinite(v), "policy values must be finite");
        require(ageingParentsMoveInWithKids >= 0.0 && ageingParentsMoveInWithKids <= 1.0,
                "ageingParentsMoveInWithKids must lie in [0,1]");
        require(baseCareProb >= 0.0 && baseCareProb <= 1.0, "baseCareProb must lie in [0,1]");
        require(personCareProb >= 0.0 && personCareProb <= 1.0, "personCareProb must lie in [0,1]");
        require(retiredHours >= 0.0 && childHours >= 0.0 && homeAdultHours >= 0.0 && workingAdultHours >= 0.0,
                "care hours must be >= 0");
        require(ageOfRetirement >= 0.0, "ageOfRetirement must be >= 0");
        require(maleAgeCareScaling > 0.0 && femaleAgeCareScaling > 0.0, "care scalings must be > 0");
        require(startYear <= endYear, "startYear must not exceed endYear");
        demography.validate();
    }
};

}  // namespace abmsurrogate::abm
