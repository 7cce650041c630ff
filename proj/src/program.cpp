#include "finrag/program.hpp"

#include <cmath>
#include <optional>

#include "finrag/errors.hpp"
#include "finrag/util.hpp"

namespace finrag {

namespace {

std::optional<ProgOp> lookup_op(std::string_view name) {
    if (name == "add") return ProgOp::add;
    if (name == "subtract") return ProgOp::subtract;
    if (name == "multiply") return ProgOp::multiply;
    if (name == "divide") return ProgOp::divide;
    if (name == "exp") return ProgOp::exp;
    if (name == "greater") return ProgOp::greater;
    return std::nullopt;
}

double parse_const(std::string_view body, std::string_view original) {
    // const_100, const_1000000, const_m1 (leading m = minus)
    double sign = 1.0;
    if (!body.empty() && body.front() == 'm') {
        sign = -1.0;
        body.remove_prefix(1);
    }
    auto value = parse_double(body);
    if (!value) throw ParseError("unknown constant: " + std::string(original));
    return sign * *value;
}

ProgArg parse_arg(std::string_view raw, std::size_t step_index) {
    const std::string text = trim(raw);
    if (text.empty()) throw ParseError("empty argument in program step");

    ProgArg arg;
    if (text.front() == '#') {
        auto ref = parse_long(std::string_view(text).substr(1));
        if (!ref || *ref < 0) throw ParseError("bad back-reference: " + text);
        if (static_cast<std::size_t>(*ref) >= step_index) {
            throw BadBackReference("#" + std::to_string(*ref) +
                                   " does not refer to an earlier step");
        }
        arg.is_back_ref = true;
        arg.step = static_cast<std::size_t>(*ref);
        return arg;
    }
    if (text.rfind("const_", 0) == 0) {
        arg.number = parse_const(std::string_view(text).substr(6), text);
        return arg;
    }

    // numeric literal: optional sign/$, comma grouping, optional trailing %
    std::string cleaned;
    bool percent = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '$' || c == ',') continue;
        if (c == '%') {
            if (i + 1 != text.size()) throw ParseError("bad numeric literal: " + text);
            percent = true;
            continue;
        }
        cleaned.push_back(c);
    }
    auto value = parse_double(cleaned);
    if (!value) throw ParseError("bad argument: " + text);
    arg.number = percent ? *value / 100.0 : *value;
    return arg;
}

}  // namespace

Program parse_program(std::string_view text) {
    Program program;
    const std::string src = trim(text);
    if (src.empty()) throw ParseError("empty program");

    std::size_t pos = 0;
    while (pos < src.size()) {
        while (pos < src.size() && (src[pos] == ',' || std::isspace(static_cast<unsigned char>(src[pos])))) {
            ++pos;
        }
        if (pos >= src.size()) break;

        std::size_t open = src.find('(', pos);
        if (open == std::string::npos) throw ParseError("expected '(' in program: " + src);
        std::size_t close = src.find(')', open);
        if (close == std::string::npos) throw ParseError("unbalanced '(' in program: " + src);

        const std::string name = trim(src.substr(pos, open - pos));
        auto op = lookup_op(name);
        if (!op) throw UnknownOperator("unknown operator: " + name);

        const std::string args = src.substr(open + 1, close - open - 1);
        std::size_t comma = args.find(',');
        if (comma == std::string::npos) {
            throw ParseError(name + " expects two arguments, got: " + args);
        }
        if (args.find(',', comma + 1) != std::string::npos) {
            // a second comma is only legal inside a digit-grouped number,
            // e.g. divide(1,234, 2) is ambiguous and rejected
            throw ParseError(name + " expects exactly two arguments, got: " + args);
        }
        const std::size_t step_index = program.steps.size();
        ProgStep step{*op, parse_arg(args.substr(0, comma), step_index),
                      parse_arg(args.substr(comma + 1), step_index)};
        program.steps.push_back(step);
        pos = close + 1;
    }
    if (program.steps.empty()) throw ParseError("no steps in program: " + src);
    return program;
}

bool is_parseable_program(std::string_view text) {
    try {
        parse_program(text);
        return true;
    } catch (const DataError&) {
        return false;
    }
}

ProgramResult execute_program(const Program& program) {
    std::vector<double> results(program.steps.size(), 0.0);
    ProgramResult final_result;

    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        const ProgStep& step = program.steps[i];
        auto resolve = [&](const ProgArg& arg) {
            return arg.is_back_ref ? results[arg.step] : arg.number;
        };
        const double a = resolve(step.lhs);
        const double b = resolve(step.rhs);

        double value = 0.0;
        bool is_boolean = false;
        bool truth = false;
        switch (step.op) {
            case ProgOp::add: value = a + b; break;
            case ProgOp::subtract: value = a - b; break;
            case ProgOp::multiply: value = a * b; break;
            case ProgOp::divide:
                if (b == 0.0) {
                    throw DivideByZero("division by zero in step " + std::to_string(i));
                }
                value = a / b;
                break;
            case ProgOp::exp: value = std::pow(a, b); break;
            case ProgOp::greater:
                truth = a > b;
                value = truth ? 1.0 : 0.0;
                is_boolean = true;
                break;
        }
        results[i] = value;
        final_result = ProgramResult{value, is_boolean, truth};
    }
    return final_result;
}

ProgramResult execute_program(std::string_view text) {
    return execute_program(parse_program(text));
}

std::string format_program_result(const ProgramResult& result) {
    if (result.is_boolean) return result.truth ? "yes" : "no";
    return format_double(round_places(result.value, 5));
}

const char* prog_op_name(ProgOp op) {
    switch (op) {
        case ProgOp::add: return "add";
        case ProgOp::subtract: return "subtract";
        case ProgOp::multiply: return "multiply";
        case ProgOp::divide: return "divide";
        case ProgOp::exp: return "exp";
        case ProgOp::greater: return "greater";
    }
    return "?";
}

}  // namespace finrag
