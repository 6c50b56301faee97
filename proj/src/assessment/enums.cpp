#include "voice/assessment/enums.hpp"

#include <algorithm>
#include <cctype>

namespace voice::assessment {

Anticoagulant classify_anticoagulant(std::string_view name) {
    std::string key(name);
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });

    struct Alias {
        std::string_view name;
        Anticoagulant drug;
    };
    static constexpr Alias aliases[] = {
        {"warfarin", Anticoagulant::warfarin},       {"coumadin", Anticoagulant::warfarin},
        {"dabigatran", Anticoagulant::dabigatran},   {"pradaxa", Anticoagulant::dabigatran},
        {"apixaban", Anticoagulant::apixaban},       {"eliquis", Anticoagulant::apixaban},
        {"rivaroxaban", Anticoagulant::rivaroxaban}, {"xarelto", Anticoagulant::rivaroxaban},
        {"edoxaban", Anticoagulant::edoxaban},       {"savaysa", Anticoagulant::edoxaban},
        {"heparin", Anticoagulant::heparin_enoxaparin}, {"enoxaparin", Anticoagulant::heparin_enoxaparin},
        {"lovenox", Anticoagulant::heparin_enoxaparin}, {"heparin_enoxaparin", Anticoagulant::heparin_enoxaparin},
    };
    for (const Alias& a : aliases) {
        if (a.name == key) return a.drug;
    }
    return Anticoagulant::other;
}

}  // namespace voice::assessment
