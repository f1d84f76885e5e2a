#include "hypobench/providers_mock.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "hypobench/digest.hpp"
#include "hypobench/hashing.hpp"
#include "hypobench/jsonl.hpp"

namespace hypobench {

namespace {

// Vocabulary for invented multi-word phrases. Deliberately disjoint from the
// encyclopedia title vocabulary below so an invented phrase never normalizes
// to an existing title.
const char* kPhraseA[] = {"silent", "amber", "fractal", "drifting", "hollow", "prismatic",
                          "solar",  "velvet", "granular", "echoing", "lucid", "tidal",
                          "oblique", "verdant", "muted", "radiant"};
const char* kPhraseB[] = {"orbit",  "signal", "meadow", "lattice", "harbor", "circuit",
                          "ribbon", "glacier", "canyon", "ember",  "mirror", "compass",
                          "anthem", "quarry", "beacon", "parlor"};
const char* kPhraseC[] = {"pulse",  "cascade", "mosaic", "current", "spiral", "bloom",
                          "vector", "tide",    "chorus", "relay",   "prism",  "halo",
                          "ledger", "murmur",  "crest",  "braid"};
const char* kPhraseD[] = {"drift",     "synthesis", "resonance", "footprint", "alignment",
                          "migration", "weave",     "gradient",  "threshold", "loop",
                          "flux",      "bloom",     "shift",     "echo",      "surge",
                          "cycle"};

const char* kTitleA[] = {"Coastal", "Urban",    "Medieval", "Digital",  "Arctic",  "Baroque",
                         "Nomadic", "Volcanic", "Agrarian", "Orbital",  "Fluvial", "Alpine",
                         "Insular", "Littoral", "Pastoral", "Monastic", "Colonial", "Glacial",
                         "Riparian", "Maritime"};
const char* kTitleB[] = {"erosion",    "cartography", "irrigation", "metallurgy", "astronomy",
                         "falconry",   "weaving",     "navigation", "masonry",    "census",
                         "forestry",   "printing",    "telegraphy", "husbandry",  "pottery",
                         "viticulture", "milling",    "tanning",    "surveying",  "archery"};
const char* kTitleC[] = {"guild",   "treaty",   "archive", "doctrine", "registry", "expedition",
                         "league",  "method",   "charter", "survey",   "society",  "institute",
                         "council", "tradition", "code",    "reform"};

const char* kTopicNames[] = {"Technology", "Sports",    "Music",       "Travel",     "Food",
                             "Health",     "Movies",    "Science",     "Fashion",    "Gaming",
                             "Finance",    "Education", "Politics",    "Environment", "Art",
                             "History",    "Space",     "Wildlife",    "Photography", "Literature"};

template <size_t N>
const char* pick(const char* (&arr)[N], uint64_t h) {
    return arr[h % N];
}

std::string capitalize(std::string word) {
    if (!word.empty() && word[0] >= 'a' && word[0] <= 'z') {
        word[0] = static_cast<char>(word[0] - 0x20);
    }
    return word;
}

// Value of the first line containing `marker`, taken after "=>" (or after the
// marker itself), cut at `stop` if given.
std::string field_after(const std::string& text, const std::string& marker, char stop = '\0') {
    size_t at = text.find(marker);
    if (at == std::string::npos) {
        return "";
    }
    size_t begin = at + marker.size();
    size_t arrow = text.find("=>", begin);
    size_t eol = text.find('\n', begin);
    if (arrow != std::string::npos && (eol == std::string::npos || arrow < eol)) {
        begin = arrow + 2;
    }
    size_t end = text.find('\n', begin);
    std::string value = text.substr(begin, end == std::string::npos ? std::string::npos : end - begin);
    if (stop != '\0') {
        size_t cut = value.find(stop);
        if (cut != std::string::npos) {
            value = value.substr(0, cut);
        }
    }
    size_t a = value.find_first_not_of(" \t");
    size_t b = value.find_last_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    return value.substr(a, b - a + 1);
}

// User side only; the system prompt reuses the field names and would shadow
// the real values.
std::string joined_user_turns(const ChatRequest& req) {
    std::string all;
    for (const auto& t : req.user_turns) {
        if (!all.empty()) {
            all += '\n';
        }
        all += t;
    }
    return all;
}

std::string made_up_phrase(uint64_t seed, const std::string& topic, int i) {
    uint64_t h = mix_hash(seed, fnv1a64(topic) ^ static_cast<uint64_t>(i));
    std::string phrase = capitalize(pick(kPhraseA, splitmix64(h)));
    phrase += ' ';
    phrase += pick(kPhraseB, splitmix64(h + 1));
    phrase += ' ';
    phrase += pick(kPhraseC, splitmix64(h + 2));
    phrase += ' ';
    phrase += pick(kPhraseD, splitmix64(h + 3));
    if (splitmix64(h + 4) % 3 == 0) {
        phrase += ' ';
        phrase += pick(kPhraseB, splitmix64(h + 5));
    }
    return phrase;
}

std::string made_up_definition(uint64_t seed, const std::string& phrase) {
    uint64_t h = mix_hash(seed, fnv1a64(phrase));
    // Weave the phrase's own words in so distinct phrases never share a
    // definition (text-similarity queries must stay distinct per term).
    std::vector<std::string> words;
    std::string cur;
    for (char c : phrase) {
        if (c == ' ') {
            words.push_back(cur);
            cur.clear();
        } else {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    if (!cur.empty()) {
        words.push_back(cur);
    }
    std::ostringstream os;
    os << "A supposed pattern in which " << (words.size() > 1 ? words[1] : "ambient")
       << " signals meet " << pick(kPhraseB, h) << " activity, gradually shaping "
       << pick(kPhraseC, splitmix64(h)) << " behavior and said to surface whenever "
       << pick(kPhraseD, splitmix64(h + 1)) << " conditions intensify around "
       << (words.empty() ? "open" : words[0]) << " systems.";
    return os.str();
}

std::string topic_explanation(const std::string& name) {
    std::string lower = name;
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return "Conversations and coverage about " + lower +
           ", including news, guides, reviews, and community commentary.";
}

}  // namespace

std::vector<MockPage> mock_encyclopedia(uint64_t seed, int pages) {
    std::vector<MockPage> out;
    out.reserve(static_cast<size_t>(pages));
    std::unordered_set<std::string> used;
    for (int i = 0; i < pages; ++i) {
        uint64_t h = mix_hash(seed ^ 0x656e6379ull, static_cast<uint64_t>(i));
        std::string title;
        for (uint64_t probe = 0;; ++probe) {
            uint64_t g = splitmix64(h + probe);
            title = std::string(pick(kTitleA, g)) + " " + pick(kTitleB, splitmix64(g));
            uint64_t form = splitmix64(g + 1) % 8;
            if (form < 3) {
                title += std::string(" ") + pick(kTitleC, splitmix64(g + 2));
            } else if (form == 3) {
                // Parenthetical disambiguator on a three-word base, so the
                // bracket-stripped form rarely collides with a plain title.
                title += std::string(" ") + pick(kTitleC, splitmix64(g + 2)) + " (" +
                         pick(kTitleB, splitmix64(g + 3)) + ")";
            }
            if (used.insert(title).second) {
                break;
            }
        }
        MockPage page;
        page.page_id = std::to_string(10000000 + i);
        page.title = title;
        uint64_t d = splitmix64(h ^ 0xdef);
        std::ostringstream def;
        def << "A documented subject concerning " << pick(kPhraseB, d) << " "
            << pick(kTitleB, splitmix64(d + 2)) << " practices, studied for its role in "
            << pick(kPhraseC, splitmix64(d)) << " " << pick(kPhraseD, splitmix64(d + 3))
            << " and " << pick(kTitleC, splitmix64(d + 1)) << " affairs.";
        page.definition = def.str();
        out.push_back(std::move(page));
    }
    return out;
}

void write_mock_dump(const std::filesystem::path& path, uint64_t seed, int pages) {
    std::vector<json> lines;
    for (const auto& page : mock_encyclopedia(seed, pages)) {
        lines.push_back(json{{"wikipedia_id", page.page_id},
                             {"wikipedia_title", page.title},
                             {"text", {page.title, page.definition,
                                       "Further reading lists additional sources."}}});
    }
    write_jsonl(path, lines);
}

MockChatProvider::MockChatProvider(MockChatOptions opts)
    : opts_(std::move(opts)), pool_(mock_encyclopedia(opts_.seed, opts_.corpus_pages)) {}

void MockChatProvider::script(const ChatRequest& req, std::string response) {
    scripted_[make_cache_key(ProviderKind::chat, canonical_chat_request(req)).request_digest] =
        std::move(response);
}

std::string MockChatProvider::chat(const ChatRequest& req) {
    req.validate();
    calls_.fetch_add(1);

    auto scripted = scripted_.find(
        make_cache_key(ProviderKind::chat, canonical_chat_request(req)).request_digest);
    if (scripted != scripted_.end()) {
        return scripted->second;
    }

    const std::string& last_turn = req.user_turns.back();
    std::string user_text = joined_user_turns(req);

    // Explanation follow-up comes before the term-list marker test: both
    // markers are present in that conversation.
    if (req.user_turns.size() > 1 && last_turn.find("explanation for each term") != std::string::npos) {
        std::ostringstream os;
        std::istringstream prior(req.assistant_turns.empty() ? "" : req.assistant_turns.back());
        std::string line;
        int n = 0;
        while (std::getline(prior, line)) {
            size_t dot = line.find(". ");
            if (dot == std::string::npos || line.find_first_not_of("0123456789") != dot) {
                continue;
            }
            std::string phrase = line.substr(dot + 2);
            ++n;
            os << n << ". " << phrase << ": " << made_up_definition(opts_.seed, phrase) << "\n";
        }
        return os.str();
    }

    if (user_text.find("topics on the internet") != std::string::npos) {
        std::ostringstream os;
        os << "Popularity shifts over time, but these areas consistently draw attention:\n\n";
        for (int i = 0; i < opts_.topic_count; ++i) {
            std::string name =
                i < 20 ? kTopicNames[i] : ("Additional interest area " + std::to_string(i + 1));
            os << (i + 1) << ". " << name << ": " << topic_explanation(name) << "\n\n";
        }
        return os.str();
    }

    if (user_text.find("nonexistent made-up terms") != std::string::npos) {
        std::string topic = field_after(user_text, "Topic:", ':');
        std::ostringstream os;
        for (int i = 0; i < opts_.terms_per_topic; ++i) {
            os << (i + 1) << ". " << made_up_phrase(opts_.seed, topic, i) << "\n";
        }
        return os.str();
    }

    if (req.system_prompt.find("Present 50 real terms") != std::string::npos) {
        std::string term = field_after(user_text, "MADE-UP TERM", ':');
        std::ostringstream os;
        os << "[\n";
        for (int j = 0; j < opts_.suggestions_per_term; ++j) {
            uint64_t h = mix_hash(opts_.seed ^ 0x73756767ull, fnv1a64(term) + static_cast<uint64_t>(j));
            std::string item;
            if (j % 5 == 4) {
                item = "Unlisted notion " + std::to_string(j + 1);
            } else {
                item = pool_[h % pool_.size()].title;
            }
            os << "    \"" << item << "\"" << (j + 1 < opts_.suggestions_per_term ? "," : "") << "\n";
        }
        os << "]";
        return os.str();
    }

    bool hypothetical_compose =
        req.system_prompt.find("MADE-UP TERM and REAL TERM") != std::string::npos ||
        req.system_prompt.find("a MADE-UP TERM and a REAL TERM") != std::string::npos;
    bool valid_compose = req.system_prompt.find("MAIN TERM and SECONDARY TERM") != std::string::npos;
    if (hypothetical_compose || valid_compose) {
        std::string topic = field_after(user_text, "TOPIC", ':');
        std::string lead = field_after(user_text, hypothetical_compose ? "REAL TERM" : "MAIN TERM", ':');
        std::string tail =
            field_after(user_text, hypothetical_compose ? "MADE-UP TERM" : "SECONDARY TERM", ':');
        std::string slot = tail + "|" + lead;
        bool fail_always = opts_.fail_question_slots.count(slot) > 0;
        bool fail_once =
            opts_.fail_question_slots_once.count(slot) > 0 && req.user_turns.size() == 1;
        std::ostringstream os;
        if (fail_always || fail_once) {
            os << "Within " << topic << ", what long-term role does " << lead
               << " play in shaping everyday discussions?";
        } else {
            os << "In conversations about " << topic << ", how does " << lead
               << " influence the way people come to understand " << tail << "?";
        }
        return os.str();
    }

    if (req.system_prompt.find("label the certainty") != std::string::npos) {
        std::string term = field_after(user_text, "TERM");
        std::string answer = field_after(user_text, "ANSWER");
        uint64_t h = mix_hash(opts_.seed ^ 0xacceull,
                              fnv1a64(term) ^ fnv1a64(answer) ^ fnv1a64(req.model_id));
        uint64_t roll = h % 100;
        const char* certainty = roll < 62 ? "MENTIONED" : (roll < 82 ? "UNREAL" : "UNKNOWN");
        std::string payload = std::string("{\n \"term\": \"") + term +
                              "\",\n \"reasoning\": \"The answer was checked for how it treats the "
                              "term on its own.\",\n \"certainty\": \"" +
                              certainty + "\"\n}";
        if (splitmix64(h) % 10 < 3) {
            return "Here is the assessment.\n```json\n" + payload + "\n```";
        }
        return payload;
    }

    if (req.system_prompt.find("real meaning") != std::string::npos) {
        std::string term = field_after(user_text, "TERM", ':');
        std::string answer = field_after(user_text, "ANSWER");
        uint64_t h = mix_hash(opts_.seed ^ 0x6d65616eull,
                              fnv1a64(term) ^ fnv1a64(answer) ^ fnv1a64(req.model_id));
        const char* verified = (h % 100) < 72 ? "TRUE" : "FALSE";
        return std::string("{\n \"term\": \"") + term +
               "\",\n \"reasoning\": \"The usage was compared against the supplied definition.\",\n "
               "\"verified\": \"" +
               verified + "\"\n}";
    }

    // Anything else is treated as a benchmark question put to a system under
    // test. Most answers restate the question (so both terms appear); a slice
    // deflects without naming the terms.
    uint64_t h = mix_hash(opts_.seed ^ 0x616e73ull, fnv1a64(last_turn) ^ fnv1a64(req.model_id));
    if (h % 100 < 18) {
        return "There is not enough reliable information to address this in detail. Without "
               "clearer sources, any description would be speculation rather than fact.";
    }
    std::ostringstream os;
    os << "That is worth unpacking. The question \"" << last_turn
       << "\" touches several threads. In practice these elements reinforce one another: "
          "attention concentrates, interpretations circulate, and over time communities settle "
          "on a shared reading of events.";
    return os.str();
}

MockEmbeddingProvider::MockEmbeddingProvider(MockEmbeddingOptions opts) : opts_(opts) {}

std::vector<EmbeddingVector> MockEmbeddingProvider::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) {
        throw DataError("embed called with no texts");
    }
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& text : texts) {
        std::vector<double> acc(opts_.dimension, 0.0);
        // Lowercased word tokens; hash unigrams and bigrams into buckets.
        std::vector<std::string> tokens;
        std::string cur;
        for (unsigned char c : text) {
            if (std::isalnum(c)) {
                cur += static_cast<char>(std::tolower(c));
            } else if (!cur.empty()) {
                tokens.push_back(cur);
                cur.clear();
            }
        }
        if (!cur.empty()) {
            tokens.push_back(cur);
        }
        auto add_feature = [&](const std::string& f) {
            for (uint64_t salt = 0; salt < 3; ++salt) {
                uint64_t h = mix_hash(opts_.seed + salt, fnv1a64(f));
                double sign = (splitmix64(h) & 1) ? 1.0 : -1.0;
                acc[h % opts_.dimension] += sign;
            }
        };
        for (size_t i = 0; i < tokens.size(); ++i) {
            add_feature(tokens[i]);
            if (i + 1 < tokens.size()) {
                add_feature(tokens[i] + " " + tokens[i + 1]);
            }
        }
        double norm = 0.0;
        for (double x : acc) {
            norm += x * x;
        }
        EmbeddingVector v;
        v.values.resize(opts_.dimension);
        if (norm > 0.0) {
            double inv = 1.0 / std::sqrt(norm);
            for (size_t i = 0; i < acc.size(); ++i) {
                v.values[i] = static_cast<float>(acc[i] * inv);
            }
        }
        out.push_back(std::move(v));
    }
    validate_embeddings(out, texts.size(), opts_.dimension);
    return out;
}

MockSearchProvider::MockSearchProvider(MockSearchOptions opts) : opts_(std::move(opts)) {}

SearchResult MockSearchProvider::web_search_exact(const std::string& phrase) {
    if (phrase.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw DataError("search phrase is blank");
    }
    uint64_t total =
        opts_.zero_results.count(phrase) > 0 ? 0 : opts_.default_total_results;
    return SearchResult{phrase, total};
}

}  // namespace hypobench
