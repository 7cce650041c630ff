#pragma once

#include <array>
#include <string_view>

// Versioned prompt assets. These strings are part of the replay-fixture
// contract: changing a template changes every request digest built from it,
// so bump the version suffix and re-record fixtures together.

namespace finrag::prompts {

inline constexpr std::string_view kAnswerSystemV1 =
    "You are a financial analysis assistant. Answer the question using only "
    "the report excerpts provided in the context. Reason step by step over "
    "the numbers, then state the final answer.";

inline constexpr std::string_view kAnswerFormatV1 =
    "Respond with a JSON object containing a single field \"answer\" whose "
    "value is the final answer as a plain number or short string, without "
    "currency symbols or thousands separators. If the context does not "
    "contain the information needed, respond with "
    "{\"answer\": \"insufficient_context\"}.";

inline constexpr std::string_view kChainSystemV1 =
    "You are a financial analysis assistant. Given a question and the exact "
    "program steps that compute its answer, write a numbered reasoning chain "
    "in plain English. Follow the program steps faithfully, one numbered line "
    "per thought, and end with a final numbered line of the form "
    "\"So the answer is <value>.\"";

inline constexpr std::string_view kDecomposeSystemV1 =
    "You split a complex financial question into the simplest sub-questions "
    "that together answer it. Each sub-question must ask for a single value "
    "for a single company and year. If the question is already simple, return "
    "it unchanged as the only item. Reply with a numbered list and nothing "
    "else.";

struct DecomposeExemplar {
    std::string_view question;
    std::string_view decomposition;  // numbered lines, '\n'-separated
};

// Fixed 5-shot block for query decomposition.
inline constexpr std::array<DecomposeExemplar, 5> kDecomposeExemplarsV1{{
    {"What is the percentage change in the fair value of the options for "
     "Apple from 2009 to 2010?",
     "1. What is the fair value of options for Apple in 2009?\n"
     "2. What is the fair value of options for Apple in 2010?"},
    {"What was the ratio of operating expenses to revenue for UPS in 2006?",
     "1. What were the operating expenses for UPS in 2006?\n"
     "2. What was the revenue for UPS in 2006?"},
    {"What was the net income of Microsoft in 2012?",
     "1. What was the net income of Microsoft in 2012?"},
    {"What is the difference between Coca-Cola's total assets and total "
     "liabilities in 2011?",
     "1. What were the total assets of Coca-Cola in 2011?\n"
     "2. What were the total liabilities of Coca-Cola in 2011?"},
    {"What was the combined revenue of Apple in 2009 and 2010?",
     "1. What was the revenue of Apple in 2009?\n"
     "2. What was the revenue of Apple in 2010?"},
}};

struct ChainExemplar {
    std::string_view question;
    std::string_view program;
    std::string_view chain;  // numbered lines, '\n'-separated
};

// Fixed 5-shot block for reasoning-chain generation.
inline constexpr std::array<ChainExemplar, 5> kChainExemplarsV1{{
    {"what was the percentage change in net revenue from 2007 to 2008?",
     "subtract(9362.2, 9244.9), divide(#0, 9244.9)",
     "1. Net revenue in 2008 was 9362.2.\n"
     "2. Net revenue in 2007 was 9244.9.\n"
     "3. The change in net revenue is 9362.2 - 9244.9 = 117.3.\n"
     "4. Dividing the change by the 2007 value gives 117.3 / 9244.9 = 0.01269.\n"
     "5. So the answer is 0.01269."},
    {"what was the combined balance of cash and short-term investments?",
     "add(25013, 2308)",
     "1. The cash balance was 25013.\n"
     "2. The short-term investments balance was 2308.\n"
     "3. Adding the two balances gives 25013 + 2308 = 27321.\n"
     "4. So the answer is 27321."},
    {"what portion of the authorized shares was outstanding?",
     "divide(4322, 18768)",
     "1. There were 4322 shares outstanding.\n"
     "2. There were 18768 authorized shares.\n"
     "3. The portion outstanding is 4322 / 18768 = 0.23029.\n"
     "4. So the answer is 0.23029."},
    {"was the 2011 segment margin higher than the 2010 segment margin?",
     "greater(78.2, 59.4)",
     "1. The segment margin in 2011 was 78.2.\n"
     "2. The segment margin in 2010 was 59.4.\n"
     "3. 78.2 is greater than 59.4.\n"
     "4. So the answer is yes."},
    {"what was the total dividend paid out, in millions?",
     "multiply(1.25, const_1000)",
     "1. The dividend per share was 1.25.\n"
     "2. There were 1000 million shares eligible.\n"
     "3. The total payout is 1.25 * 1000 = 1250.\n"
     "4. So the answer is 1250."},
}};

}  // namespace finrag::prompts
