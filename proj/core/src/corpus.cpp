#include "botcal/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "botcal/error.hpp"

namespace botcal {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

std::string_view to_string(Label label) { return label == Label::bot ? "bot" : "human"; }

Label parse_label(std::string_view text) {
    const auto t = lower(trim(text));
    if (t == "human") return Label::human;
    if (t == "bot") return Label::bot;
    throw ValidationError("unknown label '" + std::string(text) + "' (expected human or bot)");
}

std::size_t LabeledCorpus::count(Label label) const {
    return static_cast<std::size_t>(std::count_if(
        entries.begin(), entries.end(), [label](const LabeledAccount& e) { return e.label == label; }));
}

void validate(const LabeledCorpus& corpus) {
    std::unordered_set<std::string> seen;
    for (const auto& e : corpus.entries) {
        if (!seen.insert(e.account.id).second) {
            throw ValidationError("duplicate account id '" + e.account.id + "' in corpus '" +
                                  corpus.name + "'");
        }
    }
}

std::vector<Account> parse_accounts(std::istream& in) {
    std::vector<Account> accounts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            accounts.push_back(parse_account(line));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return accounts;
}

std::vector<Account> read_accounts(const std::filesystem::path& path) {
    auto in = open_in(path);
    return parse_accounts(in);
}

CorpusLoad load_corpus(std::istream& accounts_in, std::istream& labels_in, std::string name) {
    const auto accounts = parse_accounts(accounts_in);

    std::unordered_map<std::string, Label> labels;
    std::vector<std::string> label_order;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(labels_in, line)) {
        ++line_no;
        const auto row = trim(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        if (comma == std::string_view::npos) {
            throw ParseError("labels row must be 'id,label'", line_no);
        }
        const auto id = trim(row.substr(0, comma));
        const auto label = trim(row.substr(comma + 1));
        if (!header_seen) {
            header_seen = true;
            if (lower(id) == "id" && lower(label) == "label") continue;
        }
        Label parsed;
        try {
            parsed = parse_label(label);
        } catch (const ValidationError& e) {
            throw ValidationError("labels line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!labels.emplace(std::string(id), parsed).second) {
            throw ValidationError("labels line " + std::to_string(line_no) + ": duplicate id '" +
                                  std::string(id) + "'");
        }
        label_order.emplace_back(id);
    }

    CorpusLoad result;
    result.corpus.name = std::move(name);
    std::unordered_set<std::string> account_ids;
    for (const auto& a : accounts) {
        if (!account_ids.insert(a.id).second) {
            throw ValidationError("duplicate account id '" + a.id + "'");
        }
        auto it = labels.find(a.id);
        if (it == labels.end()) {
            result.unlabeled_ids.push_back(a.id);
            continue;
        }
        result.corpus.entries.push_back({a, it->second});
    }
    for (const auto& id : label_order) {
        if (!account_ids.count(id)) result.orphan_labels.push_back(id);
    }
    return result;
}

CorpusLoad load_corpus(const std::filesystem::path& accounts_path,
                       const std::filesystem::path& labels_path) {
    auto accounts = open_in(accounts_path);
    auto labels = open_in(labels_path);
    return load_corpus(accounts, labels, accounts_path.stem().string());
}

void write_accounts(std::ostream& out, const LabeledCorpus& corpus) {
    for (const auto& e : corpus.entries) out << format_account(e.account) << '\n';
}

void write_labels(std::ostream& out, const LabeledCorpus& corpus) {
    out << "id,label\n";
    for (const auto& e : corpus.entries) out << e.account.id << ',' << to_string(e.label) << '\n';
}

void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& accounts_path,
                 const std::filesystem::path& labels_path) {
    auto accounts = open_out(accounts_path);
    write_accounts(accounts, corpus);
    auto labels = open_out(labels_path);
    write_labels(labels, corpus);
    if (!accounts || !labels) throw std::runtime_error("write failed for corpus '" + corpus.name + "'");
}

LabeledCorpus merge(const std::vector<const LabeledCorpus*>& parts) {
    LabeledCorpus out;
    for (const auto* part : parts) {
        if (!out.name.empty()) out.name += '+';
        out.name += part->name;
        out.entries.insert(out.entries.end(), part->entries.begin(), part->entries.end());
    }
    validate(out);
    return out;
}

}  // namespace botcal
