#pragma once

// Structural checks of an ABM state, recomputed from the raw agent and
// household lists. Each returns an empty string when the check passes.

#include <abmsurrogate/abm/model.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace checks {

using namespace abmsurrogate::abm;

inline std::string household_closure(const SimState& s) {
    for (const auto& a : s.agents) {
        if (!a.alive) {
            if (a.householdId != kNoHousehold) return "dead agent " + std::to_string(a.id) + " still housed";
            continue;
        }
        const auto it = s.households.find(a.householdId);
        if (it == s.households.end()) return "agent " + std::to_string(a.id) + " points at a missing household";
        const auto& m = it->second.memberIds;
        if (std::count(m.begin(), m.end(), a.id) != 1) return "agent " + std::to_string(a.id) + " not listed once";
        if (a.partnerId != kNoAgent) {
            const auto& p = s.agents[static_cast<std::size_t>(a.partnerId)];
            if (!p.alive || p.partnerId != a.id) return "asymmetric partnership at " + std::to_string(a.id);
        }
    }
    for (const auto& [id, hh] : s.households) {
        if (hh.id != id) return "household key mismatch";
        if (hh.memberIds.empty()) return "empty household " + std::to_string(id);
        if (hh.townId < 0 || static_cast<std::size_t>(hh.townId) >= s.towns.size()) return "household in missing town";
        for (AgentId m : hh.memberIds) {
            if (m < 0 || static_cast<std::size_t>(m) >= s.agents.size()) return "dangling member id";
            const auto& a = s.agents[static_cast<std::size_t>(m)];
            if (!a.alive || a.householdId != id) return "member " + std::to_string(m) + " does not point back";
        }
    }
    return {};
}

inline std::string care_conservation(const SimState& s) {
    double met = 0.0, need = 0.0;
    for (const auto& a : s.agents) {
        const auto i = static_cast<std::size_t>(a.id);
        const double h = i < s.care.hoursMet.size() ? s.care.hoursMet[i] : 0.0;
        const double sup = i < s.care.hoursSupplied.size() ? s.care.hoursSupplied[i] : 0.0;
        const double bud = i < s.care.budget.size() ? s.care.budget[i] : 0.0;
        if (h < 0.0 || sup < 0.0 || bud < 0.0) return "negative hours at agent " + std::to_string(a.id);
        if (sup > bud + 1e-9) return "carer " + std::to_string(a.id) + " exceeded budget";
        if (h > a.weeklyHoursNeeded + 1e-9) return "agent " + std::to_string(a.id) + " over-served";
        if (a.alive) need += a.weeklyHoursNeeded;
        met += h;
    }
    if (met > need + 1e-6) return "total met exceeds total need";
    double supplied = 0.0;
    for (double v : s.care.hoursSupplied) supplied += v;
    if (std::abs(supplied - met) > 1e-6 * (1.0 + met)) return "supplied and met hours disagree";
    return {};
}

inline std::string agent_invariants(const SimState& s, const SimParams& p) {
    for (const auto& a : s.agents) {
        if (a.age < 0) return "negative age";
        if (!a.alive) continue;
        if ((a.careNeedLevel == 0) != (a.weeklyHoursNeeded == 0.0)) return "care level and hours disagree";
        if (a.careNeedLevel < 0 || a.careNeedLevel > kMaxCareLevel) return "care level out of range";
        if (a.status == Status::retired && a.age < p.ageOfRetirement) return "retired below retirement age";
    }
    return {};
}

/// Recomputes the per-capita annual cost from the agent list.
inline double recomputed_cost(const SimState& s, const SimParams& p) {
    double unmet = 0.0;
    int living = 0;
    for (const auto& a : s.agents) {
        if (!a.alive) continue;
        ++living;
        unmet += a.weeklyHoursNeeded - s.care.hoursMet[static_cast<std::size_t>(a.id)];
    }
    return living == 0 ? 0.0 : unmet * 52.0 * p.demography.hourlyCareCost / living;
}

}  // namespace checks
