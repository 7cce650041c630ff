#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace finrag {

// Interpreter for the arithmetic program expressions that ship with each QA
// record: a comma-separated list of binary operations such as
//
//   subtract(5829, 5735), divide(#0, 5735)
//
// Arguments are numbers (optionally "$"-prefixed, comma-grouped, or
// "%"-suffixed meaning x/100), "const_<n>" literals ("const_m1" is -1),
// or "#i" references to the result of an earlier step.

enum class ProgOp { add, subtract, multiply, divide, exp, greater };

struct ProgArg {
    bool is_back_ref = false;
    double number = 0.0;   // resolved literal value
    std::size_t step = 0;  // back-reference target when is_back_ref
};

struct ProgStep {
    ProgOp op;
    ProgArg lhs;
    ProgArg rhs;
};

struct Program {
    std::vector<ProgStep> steps;
};

// Throws ParseError, UnknownOperator, BadBackReference. Back references are
// validated here; only divide-by-zero is left to execution time.
Program parse_program(std::string_view text);

bool is_parseable_program(std::string_view text);

struct ProgramResult {
    double value = 0.0;    // boolean results stored as 1/0 for later steps
    bool is_boolean = false;
    bool truth = false;
};

ProgramResult execute_program(const Program& program);  // throws DivideByZero
ProgramResult execute_program(std::string_view text);   // parse + execute

// Display form: numbers rounded to 5 decimals ("41932.20339"), booleans as
// "yes"/"no".
std::string format_program_result(const ProgramResult& result);

const char* prog_op_name(ProgOp op);

}  // namespace finrag
