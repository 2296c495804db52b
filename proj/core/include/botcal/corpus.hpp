#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "botcal/account.hpp"

namespace botcal {

enum class Label { human = 0, bot = 1 };

std::string_view to_string(Label label);
// Case-insensitive "human" / "bot". Throws ValidationError otherwise.
Label parse_label(std::string_view text);

struct LabeledAccount {
    Account account;
    Label label = Label::human;

    bool operator==(const LabeledAccount&) const = default;
};

struct LabeledCorpus {
    std::string name;
    std::vector<LabeledAccount> entries;

    bool operator==(const LabeledCorpus&) const = default;

    std::size_t count(Label label) const;
};

// Throws ValidationError on duplicate ids.
void validate(const LabeledCorpus& corpus);

struct CorpusLoad {
    LabeledCorpus corpus;
    std::vector<std::string> unlabeled_ids;  // accounts without a label row, skipped
    std::vector<std::string> orphan_labels;  // label rows without an account
};

std::vector<Account> read_accounts(const std::filesystem::path& path);
std::vector<Account> parse_accounts(std::istream& in);

// Loads the labeled subset of an accounts file. The corpus is named after the
// accounts file stem.
CorpusLoad load_corpus(const std::filesystem::path& accounts_path,
                       const std::filesystem::path& labels_path);
CorpusLoad load_corpus(std::istream& accounts, std::istream& labels, std::string name);

void write_accounts(std::ostream& out, const LabeledCorpus& corpus);
void write_labels(std::ostream& out, const LabeledCorpus& corpus);
void save_corpus(const LabeledCorpus& corpus, const std::filesystem::path& accounts_path,
                 const std::filesystem::path& labels_path);

// Concatenates corpora; the result is named "a+b+...".
LabeledCorpus merge(const std::vector<const LabeledCorpus*>& parts);

}  // namespace botcal
