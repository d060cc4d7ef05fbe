#include "qaforge/vocab.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace qaforge::vocab {

const std::vector<std::string>& disciplines() {
    static const std::vector<std::string> list = {
        "Mathematics",
        "Computer Science and Technology",
        "Clinical Medicine",
        "Chemistry",
        "Economics",
        "Information Science and Systems Science",
        "Physics",
        "Biology",
        "Law",
        "Philosophy",
        "Sociology",
        "Literature",
        "Psychology",
        "Statistics",
        "History",
        "Power and Electrical Engineering",
        "Earth Science",
        "Management Science",
        "Electronics and Communication Technology",
        "Linguistics",
        "Preventive Medicine and Public Health",
        "Political Science",
        "Education Science",
        "Aerospace Science and Technology",
        "Astronomy",
        "Materials Science",
        "Mechanics",
        "Sports Science",
        "Ethnology and Cultural Studies",
        "Basic Medicine",
        "Environmental Science and Resource Science",
        "Journalism and Communication",
        "Religious Studies",
        "Engineering and Technology Related to Information and Systems Science",
        "Food Science and Technology",
        "Engineering and Technology",
        "Art Studies",
        "Mechanical Engineering",
        "Traditional Chinese Medicine and Chinese Materia Medica",
        "Pharmacy",
        "Civil and Architectural Engineering",
        "Chemical Engineering",
        "Nuclear Science and Technology",
        "Marxism",
        "Agronomy",
        "Energy Science and Technology",
        "Transportation Engineering",
        "Military Science",
        "Safety Science and Technology",
        "Animal Husbandry and Veterinary Science",
        "Archaeology",
        "Engineering and Technology Related to Product Applications",
        "Library, Information and Documentation Science",
        "Geomatics Science and Technology",
        "Aquaculture Science",
        "Metallurgical Engineering Technology",
        "Hydraulic Engineering",
        "Military Medicine and Special Medicine",
        "Textile Science and Technology",
        "Mining Engineering Technology",
        "Forestry",
        "Engineering and Technology Related to Natural Sciences",
    };
    return list;
}

const std::vector<std::string>& discipline_vocabulary() {
    static const std::vector<std::string> full = [] {
        std::vector<std::string> v = disciplines();
        v.push_back("cross-discipline");
        v.push_back("Other");
        v.push_back("Invalid");
        return v;
    }();
    return full;
}

bool is_valid_discipline(std::string_view name) {
    static const std::unordered_set<std::string> set(discipline_vocabulary().begin(),
                                                     discipline_vocabulary().end());
    return set.count(std::string(name)) > 0;
}

const std::vector<std::string>& stem_disciplines() {
    static const std::vector<std::string> list = {
        "Mathematics", "Physics",   "Chemistry",        "Biology",
        "Computer Science and Technology", "Mechanics", "Materials Science", "Statistics",
    };
    return list;
}

bool is_stem(std::string_view name) {
    const auto& s = stem_disciplines();
    return std::find(s.begin(), s.end(), name) != s.end();
}

int h_level(Tier t) {
    switch (t) {
        case Tier::basic: return 1;
        case Tier::standard: return 2;
        case Tier::improvement: return 3;
        case Tier::challenge: return 4;
        case Tier::extreme: return 5;
        case Tier::other: return 0;
    }
    return 0;
}

Tier tier_from_h_level(int h) {
    switch (h) {
        case 1: return Tier::basic;
        case 2: return Tier::standard;
        case 3: return Tier::improvement;
        case 4: return Tier::challenge;
        case 5: return Tier::extreme;
        default: return Tier::other;
    }
}

std::string tier_name(Tier t) {
    switch (t) {
        case Tier::basic: return "basic";
        case Tier::standard: return "standard";
        case Tier::improvement: return "improvement";
        case Tier::challenge: return "challenge";
        case Tier::extreme: return "extreme";
        case Tier::other: return "other";
    }
    return "other";
}

bool tier_from_name(std::string_view name, Tier& out) {
    if (name == "basic") out = Tier::basic;
    else if (name == "standard") out = Tier::standard;
    else if (name == "improvement") out = Tier::improvement;
    else if (name == "challenge") out = Tier::challenge;
    else if (name == "extreme") out = Tier::extreme;
    else if (name == "other") out = Tier::other;
    else return false;
    return true;
}

std::string h_level_name(int h) {
    if (h >= 1 && h <= 5) return "H" + std::to_string(h);
    return "none";
}

const std::vector<std::string>& stages() {
    static const std::vector<std::string> list = {
        "primary", "junior_high", "high_school", "college", "graduate", "other",
    };
    return list;
}

bool is_valid_stage(std::string_view name) {
    const auto& s = stages();
    return std::find(s.begin(), s.end(), name) != s.end();
}

}  // namespace qaforge::vocab
