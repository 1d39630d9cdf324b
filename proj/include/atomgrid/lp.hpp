#pragma once

// Sparse linear program in triplet form plus fixed-column MPS export/import.

#include <cstddef>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace atomgrid::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

std::string_view to_string(Sense s);

/// Index of a declared variable together with its readable name.
struct VariableHandle {
    std::size_t index = 0;
    std::string name;
};

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
};

struct Row {
    std::string name;
    Sense sense = Sense::GreaterEqual;
    double rhs = 0.0;
};

struct Term {
    std::size_t col;
    double coef;
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;

    friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Column-compressed view of the constraint matrix.
struct ColumnMatrix {
    std::vector<std::size_t> start; ///< size n+1
    std::vector<std::size_t> row;
    std::vector<double> value;
};

/// Minimization LP: min c'x  s.t.  rows (<=, =, >=),  lower <= x <= upper.
///
/// Variable and row names are unique. Duplicate (row, col) entries are summed
/// by `columns()`; `add_row` merges duplicates within one row.
class LPProblem {
public:
    VariableHandle add_variable(std::string name, double lower = 0.0, double upper = kInf,
                                double cost = 0.0);
    std::size_t add_row(std::string name, Sense sense, double rhs, std::span<const Term> terms);
    std::size_t add_row(std::string name, Sense sense, double rhs, std::initializer_list<Term> terms)
    {
        return add_row(std::move(name), sense, rhs, std::span<const Term>(terms.begin(), terms.size()));
    }

    void set_cost(std::size_t col, double cost) { cost_.at(col) = cost; }
    void add_cost(std::size_t col, double cost) { cost_.at(col) += cost; }
    void set_bounds(std::size_t col, double lower, double upper);

    std::size_t num_variables() const { return vars_.size(); }
    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_nonzeros() const { return triplets_.size(); }

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Row>& rows() const { return rows_; }
    const std::vector<double>& costs() const { return cost_; }
    const std::vector<Triplet>& triplets() const { return triplets_; }
    const Variable& variable(std::size_t j) const { return vars_.at(j); }
    const Row& row(std::size_t i) const { return rows_.at(i); }

    /// Index of a named variable or row; npos if absent.
    std::size_t find_variable(std::string_view name) const;
    std::size_t find_row(std::string_view name) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    ColumnMatrix columns() const;
    /// Row activities A x.
    std::vector<double> activities(std::span<const double> x) const;
    double objective(std::span<const double> x) const;

    /// Throws ValidationError on NaN/inf coefficients, bad indices or empty LP.
    void validate() const;

private:
    std::vector<Variable> vars_;
    std::vector<double> cost_;
    std::vector<Row> rows_;
    std::vector<Triplet> triplets_;
    std::unordered_map<std::string, std::size_t> var_index_;
    std::unordered_map<std::string, std::size_t> row_index_;
};

/// Objective row name used in MPS output.
inline constexpr std::string_view kObjectiveRow = "COST";

/// Renders the LP as MPS text. Records follow the fixed-format field order
/// (names padded to the classic columns) but names may exceed 8 characters,
/// so readers must split on whitespace.
std::string to_mps(const LPProblem& lp, std::string_view name = "ATOMGRID");
void export_mps(const LPProblem& lp, const std::filesystem::path& path,
                std::string_view name = "ATOMGRID");

LPProblem parse_mps(std::string_view text);
LPProblem read_mps(const std::filesystem::path& path);

} // namespace atomgrid::lp
