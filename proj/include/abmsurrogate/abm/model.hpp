#pragma once

// Social-care agent-based model: a synthetic population living on a coarse
// grid of towns, stepped yearly. Care needs develop with age, family members
// supply informal care, and unmet need is priced to give the annual cost of
// social care per capita.

#include <abmsurrogate/abm/params.hpp>
#include <abmsurrogate/core/error.hpp>
#include <abmsurrogate/core/random.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace abmsurrogate::abm {

using AgentId = std::int32_t;
using HouseholdId = std::int32_t;
using TownId = std::int32_t;

inline constexpr AgentId kNoAgent = -1;
inline constexpr HouseholdId kNoHousehold = -1;
inline constexpr int kMaxCareLevel = 4;
/// Weekly hours of care required at each care-need level.
inline constexpr std::array<double, kMaxCareLevel + 1> kCareLevelHours{0.0, 8.0, 16.0, 30.0, 80.0};
inline constexpr double kWeeksPerYear = 52.0;

enum class Gender : std::uint8_t { male, female };
enum class Status : std::uint8_t { child, workingAdult, unemployedAdult, retired };

struct Agent {
    AgentId id = kNoAgent;
    int age = 0;
    Gender gender = Gender::male;
    bool alive = true;
    Status status = Status::child;
    int careNeedLevel = 0;
    double weeklyHoursNeeded = 0.0;
    HouseholdId householdId = kNoHousehold;
    AgentId partnerId = kNoAgent;
    std::array<AgentId, 2> parentIds{kNoAgent, kNoAgent};
    std::vector<AgentId> childIds;

    friend bool operator==(const Agent&, const Agent&) = default;
};

struct Town {
    int gridX = 0;
    int gridY = 0;
    double densityWeight = 0.0;

    friend bool operator==(const Town&, const Town&) = default;
};

struct Household {
    HouseholdId id = kNoHousehold;
    TownId townId = 0;
    std::vector<AgentId> memberIds;

    friend bool operator==(const Household&, const Household&) = default;
};

/// Per-agent result of the yearly care matching, indexed by agent id.
struct CareAllocation {
    std::vector<double> hoursMet;
    std::vector<double> hoursSupplied;
    std::vector<double> budget;

    friend bool operator==(const CareAllocation&, const CareAllocation&) = default;
};

/// Event counters of the most recent year.
struct YearEvents {
    int deaths = 0;
    int births = 0;
    int partnerships = 0;
    int dissolutions = 0;
    int migrations = 0;
    int moveIns = 0;

    friend bool operator==(const YearEvents&, const YearEvents&) = default;
};

inline constexpr int kGridWidth = 8;
inline constexpr int kGridHeight = 12;

// Relative population density, north (row 0) to south. Zero cells are sea.
inline constexpr std::array<std::array<double, kGridWidth>, kGridHeight> kDensityMap{{
    {0, 0, 0, 1, 1, 0, 0, 0},
    {0, 0, 1, 2, 1, 0, 0, 0},
    {0, 0, 2, 4, 2, 1, 0, 0},
    {0, 0, 1, 2, 3, 1, 0, 0},
    {0, 0, 0, 2, 5, 2, 0, 0},
    {0, 0, 1, 3, 6, 4, 1, 0},
    {0, 1, 3, 8, 5, 6, 2, 0},
    {0, 1, 2, 6, 4, 3, 2, 0},
    {0, 2, 4, 3, 5, 4, 3, 1},
    {1, 2, 3, 4, 6, 8, 5, 2},
    {1, 3, 2, 3, 5, 9, 12, 3},
    {2, 1, 1, 2, 3, 4, 3, 1},
}};

/// Town grid with density weights normalised to sum to one.
inline std::vector<Town> make_towns() {
    std::vector<Town> towns;
    towns.reserve(kGridWidth * kGridHeight);
    double total = 0.0;
    for (int y = 0; y < kGridHeight; ++y) {
        for (int x = 0; x < kGridWidth; ++x) {
            towns.push_back({x, y, kDensityMap[y][x]});
            total += kDensityMap[y][x];
        }
    }
    for (auto& t : towns) t.densityWeight /= total;
    return towns;
}

struct SimState {
    int year = 0;
    std::vector<Agent> agents;  // agents[id].id == id; dead agents are kept for kinship links
    std::map<HouseholdId, Household> households;
    std::vector<Town> towns;
    Rng rng;
    HouseholdId nextHouseholdId = 0;
    CareAllocation care;
    YearEvents events;

    friend bool operator==(const SimState&, const SimState&) = default;

    [[nodiscard]] std::size_t living_population() const {
        return static_cast<std::size_t>(
            std::count_if(agents.begin(), agents.end(), [](const Agent& a) { return a.alive; }));
    }
};

struct RunResult {
    double finalCostPerCapita = 0.0;
    std::vector<double> costSeries;              // one entry per year, startYear..endYear
    std::vector<std::size_t> populationSeries;  // same indexing
    std::uint64_t seed = 0;
    SimParams params;
    bool extinct = false;

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

namespace detail {

inline TownId sample_town(const std::vector<Town>& towns, Rng& rng) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    TownId last_positive = 0;
    for (std::size_t i = 0; i < towns.size(); ++i) {
        if (towns[i].densityWeight <= 0.0) continue;
        cumulative += towns[i].densityWeight;
        last_positive = static_cast<TownId>(i);
        if (u < cumulative) return last_positive;
    }
    return last_positive;
}

inline HouseholdId new_household(SimState& s, TownId town) {
    const HouseholdId id = s.nextHouseholdId++;
    s.households.emplace(id, Household{id, town, {}});
    return id;
}

inline void leave_household(SimState& s, AgentId id) {
    auto& agent = s.agents[id];
    const auto it = s.households.find(agent.householdId);
    if (it != s.households.end()) {
        auto& members = it->second.memberIds;
        members.erase(std::remove(members.begin(), members.end(), id), members.end());
        if (members.empty()) s.households.erase(it);
    }
    agent.householdId = kNoHousehold;
}

inline void join_household(SimState& s, AgentId id, HouseholdId hh) {
    leave_household(s, id);
    auto& members = s.households.at(hh).memberIds;
    members.insert(std::upper_bound(members.begin(), members.end(), id), id);
    s.agents[id].householdId = hh;
}

inline TownId town_of(const SimState& s, AgentId id) {
    return s.households.at(s.agents[id].householdId).townId;
}

inline bool is_parent_of(const Agent& parent, const Agent& child) {
    return child.parentIds[0] == parent.id || child.parentIds[1] == parent.id;
}

inline bool are_siblings(const Agent& a, const Agent& b) {
    for (AgentId p : a.parentIds) {
        if (p != kNoAgent && (b.parentIds[0] == p || b.parentIds[1] == p)) return true;
    }
    return false;
}

inline void kill(SimState& s, AgentId id) {
    auto& agent = s.agents[id];
    agent.alive = false;
    if (agent.partnerId != kNoAgent) {
        s.agents[agent.partnerId].partnerId = kNoAgent;
        agent.partnerId = kNoAgent;
    }
    leave_household(s, id);
    ++s.events.deaths;
}

inline Status working_age_status(const SimParams& params, Rng& rng) {
    return rng.bernoulli(params.demography.initialEmploymentProb) ? Status::workingAdult
                                                                   : Status::unemployedAdult;
}

inline double status_budget(const Agent& a, const SimParams& params) {
    switch (a.status) {
        case Status::child: return params.childHours;
        case Status::workingAdult: return params.workingAdultHours;
        case Status::unemployedAdult: return params.homeAdultHours;
        case Status::retired: return params.retiredHours;
    }
    return 0.0;
}

inline void age_agents(SimState& s) {
    for (auto& a : s.agents) {
        if (a.alive) ++a.age;
    }
}

inline void apply_mortality(SimState& s, const SimParams& params) {
    const auto& d = params.demography;
    const auto count = static_cast<AgentId>(s.agents.size());
    for (AgentId id = 0; id < count; ++id) {
        const Agent& a = s.agents[id];
        if (!a.alive) continue;
        double q = 0.0;
        if (a.age >= d.maxAge) {
            q = 1.0;
        } else if (a.age <= 1) {
            q = d.infantMortality;
        } else {
            q = d.mortalityBase * std::exp(d.mortalityGrowth * a.age);
            if (a.gender == Gender::male) q *= d.maleMortalityFactor;
            q *= 1.0 + d.careNeedMortalityFactor * a.careNeedLevel;
        }
        if (s.rng.bernoulli(std::min(1.0, q))) kill(s, id);
    }
}

inline void apply_births(SimState& s, const SimParams& params) {
    const auto& d = params.demography;
    const auto count = static_cast<AgentId>(s.agents.size());
    for (AgentId id = 0; id < count; ++id) {
        const Agent& mother = s.agents[id];
        if (!mother.alive || mother.gender != Gender::female || mother.partnerId == kNoAgent) continue;
        if (mother.age < d.fertilityMinAge || mother.age > d.fertilityMaxAge) continue;
        if (!s.rng.bernoulli(d.fertilityProb)) continue;
        Agent baby;
        baby.id = static_cast<AgentId>(s.agents.size());
        baby.gender = s.rng.bernoulli(0.5) ? Gender::female : Gender::male;
        baby.parentIds = {id, mother.partnerId};
        const HouseholdId hh = mother.householdId;
        const AgentId father = mother.partnerId;
        s.agents.push_back(std::move(baby));
        const AgentId baby_id = s.agents.back().id;
        s.agents[id].childIds.push_back(baby_id);
        s.agents[father].childIds.push_back(baby_id);
        join_household(s, baby_id, hh);
        ++s.events.births;
    }
}

// Dependent children of `parent` that live in the parent's household.
inline std::vector<AgentId> dependants(const SimState& s, AgentId parent, const SimParams& params) {
    std::vector<AgentId> out;
    const Agent& p = s.agents[parent];
    for (AgentId c : p.childIds) {
        const Agent& child = s.agents[c];
        if (child.alive && child.age < params.demography.adultAge && child.householdId == p.householdId) {
            out.push_back(c);
        }
    }
    return out;
}

inline void update_partnerships(SimState& s, const SimParams& params) {
    const auto& d = params.demography;
    const auto count = static_cast<AgentId>(s.agents.size());

    // Dissolution: the man moves to a new household in the same town.
    for (AgentId id = 0; id < count; ++id) {
        const Agent& woman = s.agents[id];
        if (!woman.alive || woman.gender != Gender::female || woman.partnerId == kNoAgent) continue;
        if (!s.rng.bernoulli(d.dissolutionProb)) continue;
        const AgentId man = woman.partnerId;
        const HouseholdId hh = new_household(s, town_of(s, man));
        join_household(s, man, hh);
        s.agents[man].partnerId = kNoAgent;
        s.agents[id].partnerId = kNoAgent;
        ++s.events.dissolutions;
    }

    // Formation: seeking singles are paired at random within their town.
    std::map<TownId, std::array<std::vector<AgentId>, 2>> seeking;
    for (AgentId id = 0; id < count; ++id) {
        const Agent& a = s.agents[id];
        if (!a.alive || a.partnerId != kNoAgent) continue;
        if (a.age < d.adultAge || a.age > d.partnershipMaxAge) continue;
        if (!s.rng.bernoulli(d.partnershipProb)) continue;
        seeking[town_of(s, id)][a.gender == Gender::female ? 1 : 0].push_back(id);
    }
    for (auto& [town, pools] : seeking) {
        auto& men = pools[0];
        auto& women = pools[1];
        s.rng.shuffle(std::span(men));
        s.rng.shuffle(std::span(women));
        const std::size_t pairs = std::min(men.size(), women.size());
        for (std::size_t i = 0; i < pairs; ++i) {
            const Agent& m = s.agents[men[i]];
            const Agent& w = s.agents[women[i]];
            if (are_siblings(m, w) || is_parent_of(m, w) || is_parent_of(w, m)) continue;
            auto movers = dependants(s, w.id, params);
            auto his = dependants(s, m.id, params);
            movers.insert(movers.end(), his.begin(), his.end());
            const HouseholdId hh = new_household(s, town);
            const AgentId mid = m.id;
            const AgentId wid = w.id;
            join_household(s, mid, hh);
            join_household(s, wid, hh);
            for (AgentId c : movers) join_household(s, c, hh);
            s.agents[mid].partnerId = wid;
            s.agents[wid].partnerId = mid;
            ++s.events.partnerships;
        }
    }
}

inline void apply_migration(SimState& s, const SimParams& params) {
    std::vector<HouseholdId> ids;
    ids.reserve(s.households.size());
    for (const auto& [id, hh] : s.households) ids.push_back(id);
    for (HouseholdId id : ids) {
        if (!s.rng.bernoulli(params.demography.migrationProb)) continue;
        s.households.at(id).townId = sample_town(s.towns, s.rng);
        ++s.events.migrations;
    }

    // Ageing parents who live alone and need care move in with an adult child.
    const auto count = static_cast<AgentId>(s.agents.size());
    for (AgentId id = 0; id < count; ++id) {
        const Agent& a = s.agents[id];
        if (!a.alive || a.partnerId != kNoAgent || a.careNeedLevel == 0) continue;
        if (s.households.at(a.householdId).memberIds.size() != 1) continue;
        std::vector<AgentId> candidates;
        for (AgentId c : a.childIds) {
            const Agent& child = s.agents[c];
            if (child.alive && child.age >= params.demography.adultAge && child.householdId != a.householdId) {
                candidates.push_back(c);
            }
        }
        if (candidates.empty() || !s.rng.bernoulli(params.ageingParentsMoveInWithKids)) continue;
        const AgentId host = candidates[s.rng.below(candidates.size())];
        join_household(s, id, s.agents[host].householdId);
        ++s.events.moveIns;
    }
}

inline void update_employment(SimState& s, const SimParams& params) {
    const auto& d = params.demography;
    for (auto& a : s.agents) {
        if (!a.alive) continue;
        if (a.age < d.adultAge) {
            a.status = Status::child;
        } else if (a.age >= params.ageOfRetirement) {
            continue;  // handled by retirement
        } else if (a.status == Status::child || a.status == Status::retired) {
            a.status = working_age_status(params, s.rng);
        } else if (a.status == Status::workingAdult) {
            if (s.rng.bernoulli(d.unemploymentProb)) a.status = Status::unemployedAdult;
        } else if (s.rng.bernoulli(d.reemploymentProb)) {
            a.status = Status::workingAdult;
        }
    }
}

inline void apply_retirement(SimState& s, const SimParams& params) {
    for (auto& a : s.agents) {
        if (a.alive && a.age >= params.demography.adultAge && a.age >= params.ageOfRetirement) {
            a.status = Status::retired;
        }
    }
}

}  // namespace detail

/// Annual probability of moving one care-need level up: personCareProb *
/// exp(age / scaling), with the scaling chosen by gender and the result capped at 1.
inline double care_need_probability(int age, Gender gender, const SimParams& params) {
    const double scaling = gender == Gender::male ? params.maleAgeCareScaling : params.femaleAgeCareScaling;
    return std::min(1.0, params.personCareProb * std::exp(static_cast<double>(age) / scaling));
}

/// Draws this year's care-need level for a living agent (at most one level up).
inline int develop_care_need(const Agent& agent, const SimParams& params, Rng& rng) {
    if (agent.careNeedLevel >= kMaxCareLevel) return kMaxCareLevel;
    const double p = care_need_probability(agent.age, agent.gender, params);
    return rng.bernoulli(p) ? agent.careNeedLevel + 1 : agent.careNeedLevel;
}

/// Matches informal care supply to need: co-resident members first, then kin
/// (partner, parents, children, siblings) in the same town. Willingness is
/// drawn from the state's generator.
inline CareAllocation allocate_care(SimState& s, const SimParams& params) {
    const auto& d = params.demography;
    const std::size_t n = s.agents.size();
    CareAllocation out;
    out.hoursMet.assign(n, 0.0);
    out.hoursSupplied.assign(n, 0.0);
    out.budget.assign(n, 0.0);

    const double willing_p = std::min(1.0, params.baseCareProb * d.willingnessScale);
    for (const auto& a : s.agents) {
        if (!a.alive || a.careNeedLevel > d.carerMaxNeedLevel || a.age < d.childCareMinAge) continue;
        const double base = detail::status_budget(a, params);
        out.budget[a.id] = s.rng.bernoulli(willing_p) ? base : base * d.unwillingFraction;
    }
    std::vector<double> remaining = out.budget;

    auto transfer = [&](AgentId carer, AgentId needy) {
        const double gap = s.agents[needy].weeklyHoursNeeded - out.hoursMet[needy];
        const double given = std::min(remaining[carer], gap);
        if (given <= 0.0) return;
        remaining[carer] -= given;
        out.hoursMet[needy] += given;
    };

    for (const auto& [hid, hh] : s.households) {
        for (AgentId needy : hh.memberIds) {
            if (s.agents[needy].weeklyHoursNeeded <= 0.0) continue;
            for (AgentId carer : hh.memberIds) {
                if (carer != needy) transfer(carer, needy);
            }
        }
    }

    std::vector<AgentId> kin;
    for (const auto& a : s.agents) {
        if (!a.alive || a.weeklyHoursNeeded - out.hoursMet[a.id] <= 0.0) continue;
        kin.clear();
        auto consider = [&](AgentId k) {
            if (k != kNoAgent && k != a.id && s.agents[k].alive) kin.push_back(k);
        };
        consider(a.partnerId);
        for (AgentId p : a.parentIds) {
            consider(p);
            if (p != kNoAgent) {
                for (AgentId sib : s.agents[p].childIds) consider(sib);
            }
        }
        for (AgentId c : a.childIds) consider(c);
        std::sort(kin.begin(), kin.end());
        kin.erase(std::unique(kin.begin(), kin.end()), kin.end());
        const TownId town = detail::town_of(s, a.id);
        for (AgentId k : kin) {
            if (s.agents[k].householdId == a.householdId || detail::town_of(s, k) != town) continue;
            transfer(k, a.id);
        }
    }

    for (std::size_t i = 0; i < n; ++i) out.hoursSupplied[i] = out.budget[i] - remaining[i];
    return out;
}

/// Unmet weekly care hours priced at the hourly rate, per living person per year.
inline double annual_cost(const SimState& s, const SimParams& params) {
    double unmet = 0.0;
    std::size_t living = 0;
    for (const auto& a : s.agents) {
        if (!a.alive) continue;
        ++living;
        const double met = a.id < static_cast<AgentId>(s.care.hoursMet.size()) ? s.care.hoursMet[a.id] : 0.0;
        unmet += std::max(0.0, a.weeklyHoursNeeded - met);
    }
    if (living == 0) return 0.0;
    return unmet * kWeeksPerYear * params.demography.hourlyCareCost / static_cast<double>(living);
}

/// Random initial population at the start year: partnered couples placed in
/// density-sampled towns.
inline SimState init_population(std::uint64_t seed, const SimParams& params) {
    const auto& d = params.demography;
    SimState s;
    s.year = params.startYear;
    s.towns = make_towns();
    s.rng = Rng(seed);
    s.agents.reserve(static_cast<std::size_t>(d.initialCouples) * 6);
    for (int c = 0; c < d.initialCouples; ++c) {
        const HouseholdId hh = detail::new_household(s, detail::sample_town(s.towns, s.rng));
        std::array<AgentId, 2> pair{};
        for (int g = 0; g < 2; ++g) {
            Agent a;
            a.id = static_cast<AgentId>(s.agents.size());
            a.gender = g == 0 ? Gender::male : Gender::female;
            a.age = static_cast<int>(s.rng.between(d.initialAgeMin, d.initialAgeMax));
            if (a.age < d.adultAge) {
                a.status = Status::child;
            } else if (a.age >= params.ageOfRetirement) {
                a.status = Status::retired;
            } else {
                a.status = detail::working_age_status(params, s.rng);
            }
            pair[g] = a.id;
            s.agents.push_back(std::move(a));
            detail::join_household(s, pair[g], hh);
        }
        s.agents[pair[0]].partnerId = pair[1];
        s.agents[pair[1]].partnerId = pair[0];
    }
    return s;
}

/// Advances the state by one year: ageing, mortality, births, partnerships,
/// migration (including ageing parents moving in), employment, retirement,
/// care needs, care allocation. Cost follows from annual_cost(state).
inline SimState step_year(SimState s, const SimParams& params) {
    if (s.year >= params.endYear) {
        throw SequencingError("cannot step past end year " + std::to_string(params.endYear));
    }
    ++s.year;
    s.events = {};
    detail::age_agents(s);
    detail::apply_mortality(s, params);
    detail::apply_births(s, params);
    detail::update_partnerships(s, params);
    detail::apply_migration(s, params);
    detail::update_employment(s, params);
    detail::apply_retirement(s, params);
    for (auto& a : s.agents) {
        if (!a.alive) continue;
        a.careNeedLevel = develop_care_need(a, params, s.rng);
        a.weeklyHoursNeeded = kCareLevelHours[a.careNeedLevel];
    }
    s.care = allocate_care(s, params);
    return s;
}

/// Full run from the start year to the end year.
inline RunResult run_simulation(const SimParams& params, std::uint64_t seed) {
    params.validate();
    RunResult result;
    result.seed = seed;
    result.params = params;
    const auto years = static_cast<std::size_t>(params.endYear - params.startYear + 1);
    result.costSeries.reserve(years);
    result.populationSeries.reserve(years);

    SimState s = init_population(seed, params);
    result.costSeries.push_back(annual_cost(s, params));
    result.populationSeries.push_back(s.living_population());
    while (s.year < params.endYear) {
        s = step_year(std::move(s), params);
        result.costSeries.push_back(annual_cost(s, params));
        result.populationSeries.push_back(s.living_population());
    }
    result.extinct = result.populationSeries.back() == 0;
    result.finalCostPerCapita = result.extinct ? 0.0 : result.costSeries.back();
    return result;
}

}  // namespace abmsurrogate::abm
