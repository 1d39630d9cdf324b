#include "atomgrid/lp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"

namespace atomgrid::lp {

std::string_view to_string(Sense s)
{
    switch (s) {
    case Sense::LessEqual:
        return "<=";
    case Sense::Equal:
        return "=";
    case Sense::GreaterEqual:
        return ">=";
    }
    return "?";
}

VariableHandle LPProblem::add_variable(std::string name, double lower, double upper, double cost)
{
    const auto idx = vars_.size();
    if (!var_index_.emplace(name, idx).second) {
        throw ValidationError(fmt::format("duplicate variable name '{}'", name));
    }
    vars_.push_back({name, lower, upper});
    cost_.push_back(cost);
    return {idx, std::move(name)};
}

std::size_t LPProblem::add_row(std::string name, Sense sense, double rhs, std::span<const Term> terms)
{
    const auto idx = rows_.size();
    if (name == kObjectiveRow) {
        throw ValidationError(fmt::format("row name '{}' is reserved", name));
    }
    if (!row_index_.emplace(name, idx).second) {
        throw ValidationError(fmt::format("duplicate row name '{}'", name));
    }
    rows_.push_back({std::move(name), sense, rhs});
    // merge duplicate columns, keep first-seen order
    std::vector<Term> merged;
    merged.reserve(terms.size());
    for (const auto& t : terms) {
        if (t.col >= vars_.size()) {
            throw ValidationError(fmt::format("row '{}' references undeclared column {}",
                                              rows_.back().name, t.col));
        }
        auto it = std::find_if(merged.begin(), merged.end(),
                               [&](const Term& m) { return m.col == t.col; });
        if (it == merged.end()) {
            merged.push_back(t);
        } else {
            it->coef += t.coef;
        }
    }
    for (const auto& t : merged) {
        if (t.coef != 0.0) {
            triplets_.push_back({idx, t.col, t.coef});
        }
    }
    return idx;
}

void LPProblem::set_bounds(std::size_t col, double lower, double upper)
{
    auto& v = vars_.at(col);
    v.lower = lower;
    v.upper = upper;
}

std::size_t LPProblem::find_variable(std::string_view name) const
{
    const auto it = var_index_.find(std::string(name));
    return it == var_index_.end() ? npos : it->second;
}

std::size_t LPProblem::find_row(std::string_view name) const
{
    const auto it = row_index_.find(std::string(name));
    return it == row_index_.end() ? npos : it->second;
}

ColumnMatrix LPProblem::columns() const
{
    ColumnMatrix m;
    const auto n = vars_.size();
    m.start.assign(n + 1, 0);
    for (const auto& t : triplets_) {
        ++m.start[t.col + 1];
    }
    for (std::size_t j = 0; j < n; ++j) {
        m.start[j + 1] += m.start[j];
    }
    m.row.resize(triplets_.size());
    m.value.resize(triplets_.size());
    auto fill = m.start;
    for (const auto& t : triplets_) {
        const auto pos = fill[t.col]++;
        m.row[pos] = t.row;
        m.value[pos] = t.value;
    }
    return m;
}

std::vector<double> LPProblem::activities(std::span<const double> x) const
{
    std::vector<double> act(rows_.size(), 0.0);
    for (const auto& t : triplets_) {
        act[t.row] += t.value * x[t.col];
    }
    return act;
}

double LPProblem::objective(std::span<const double> x) const
{
    double obj = 0.0;
    for (std::size_t j = 0; j < cost_.size(); ++j) {
        obj += cost_[j] * x[j];
    }
    return obj;
}

void LPProblem::validate() const
{
    if (vars_.empty()) {
        throw ValidationError("no variables");
    }
    for (std::size_t j = 0; j < vars_.size(); ++j) {
        const auto& v = vars_[j];
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower == kInf || v.upper == -kInf) {
            throw ValidationError(fmt::format("variable '{}' has invalid bounds", v.name));
        }
        if (v.lower > v.upper) {
            throw ValidationError(fmt::format("variable '{}' has lower bound above upper bound", v.name));
        }
        if (!std::isfinite(cost_[j])) {
            throw ValidationError(fmt::format("variable '{}' has non-finite cost", v.name));
        }
    }
    for (const auto& r : rows_) {
        if (!std::isfinite(r.rhs)) {
            throw ValidationError(fmt::format("row '{}' has non-finite rhs", r.name));
        }
    }
    for (const auto& t : triplets_) {
        if (t.row >= rows_.size() || t.col >= vars_.size()) {
            throw ValidationError("coefficient references an undeclared row or column");
        }
        if (!std::isfinite(t.value)) {
            throw ValidationError(fmt::format("row '{}' has non-finite coefficient on '{}'",
                                              rows_[t.row].name, vars_[t.col].name));
        }
    }
}

// ---------------------------------------------------------------------------
// MPS

namespace {

char sense_code(Sense s)
{
    switch (s) {
    case Sense::LessEqual:
        return 'L';
    case Sense::Equal:
        return 'E';
    case Sense::GreaterEqual:
        return 'G';
    }
    return 'N';
}

// Field layout of fixed MPS: 2-3 code, 5-12 name1, 15-22 name2, 25-36 value.
void field_line(std::string& out, std::string_view code, std::string_view name1,
                std::string_view name2, std::string_view value)
{
    out += fmt::format(" {:<2} {:<8}  {:<8}  {}\n", code, name1, name2, value);
}

} // namespace

std::string to_mps(const LPProblem& lp, std::string_view name)
{
    lp.validate();
    std::string out;
    out.reserve(64 * (lp.num_nonzeros() + lp.num_variables() + lp.num_rows()) + 64);
    out += fmt::format("NAME          {}\n", name);
    out += "ROWS\n";
    out += fmt::format(" N  {}\n", kObjectiveRow);
    for (const auto& r : lp.rows()) {
        out += fmt::format(" {}  {}\n", sense_code(r.sense), r.name);
    }
    out += "COLUMNS\n";
    const auto cols = lp.columns();
    for (std::size_t j = 0; j < lp.num_variables(); ++j) {
        const auto& var = lp.variable(j).name;
        const double c = lp.costs()[j];
        const bool empty = cols.start[j] == cols.start[j + 1];
        if (c != 0.0 || empty) {
            field_line(out, "", var, kObjectiveRow, detail::format_double(c));
        }
        // entries sorted by row index for a deterministic layout
        std::vector<std::pair<std::size_t, double>> entries;
        for (auto k = cols.start[j]; k < cols.start[j + 1]; ++k) {
            entries.emplace_back(cols.row[k], cols.value[k]);
        }
        std::sort(entries.begin(), entries.end());
        for (const auto& [row, value] : entries) {
            field_line(out, "", var, lp.row(row).name, detail::format_double(value));
        }
    }
    out += "RHS\n";
    for (const auto& r : lp.rows()) {
        if (r.rhs != 0.0) {
            field_line(out, "", "RHS", r.name, detail::format_double(r.rhs));
        }
    }
    out += "BOUNDS\n";
    for (const auto& v : lp.variables()) {
        if (v.lower == v.upper) {
            field_line(out, "FX", "BND", v.name, detail::format_double(v.lower));
            continue;
        }
        if (v.lower == -kInf && v.upper == kInf) {
            field_line(out, "FR", "BND", v.name, "");
            continue;
        }
        if (v.lower == -kInf) {
            field_line(out, "MI", "BND", v.name, "");
        } else if (v.lower != 0.0) {
            field_line(out, "LO", "BND", v.name, detail::format_double(v.lower));
        }
        if (v.upper != kInf) {
            field_line(out, "UP", "BND", v.name, detail::format_double(v.upper));
        }
    }
    out += "ENDATA\n";
    // trailing blanks of empty value fields are dropped
    std::string cleaned;
    cleaned.reserve(out.size());
    std::size_t pos = 0;
    while (pos < out.size()) {
        const auto nl = out.find('\n', pos);
        auto line = std::string_view(out).substr(pos, nl - pos);
        while (!line.empty() && line.back() == ' ') {
            line.remove_suffix(1);
        }
        cleaned += line;
        cleaned += '\n';
        pos = nl + 1;
    }
    return cleaned;
}

void export_mps(const LPProblem& lp, const std::filesystem::path& path, std::string_view name)
{
    detail::write_text_file(path, to_mps(lp, name));
}

namespace {

std::vector<std::string_view> tokens(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) {
            ++i;
        }
        const auto start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
            ++i;
        }
        if (i > start) {
            out.push_back(line.substr(start, i - start));
        }
    }
    return out;
}

} // namespace

LPProblem parse_mps(std::string_view text)
{
    enum class Section { None, Rows, Columns, Rhs, Bounds, Ranges, End };
    Section section = Section::None;

    struct PendingRow {
        std::string name;
        Sense sense;
        double rhs = 0.0;
        std::vector<Term> terms;
    };
    std::vector<PendingRow> rows;
    std::map<std::string, std::size_t, std::less<>> row_index;
    std::string objective_row;

    struct PendingCol {
        std::string name;
        double cost = 0.0;
        double lower = 0.0;
        double upper = kInf;
    };
    std::vector<PendingCol> cols;
    std::map<std::string, std::size_t, std::less<>> col_index;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto fail = [&](std::string_view msg) {
        throw ValidationError(fmt::format("MPS line {}: {}", line_no, msg));
    };
    auto number = [&](std::string_view s) { return detail::parse_double(s, fmt::format("MPS line {}", line_no)); };

    while (pos <= text.size() && section != Section::End) {
        const auto nl = text.find('\n', pos);
        const auto line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty() || line[0] == '*') {
            continue;
        }
        const auto tok = tokens(line);
        if (tok.empty()) {
            continue;
        }
        if (line[0] != ' ' && line[0] != '\t') {
            const auto head = tok[0];
            if (head == "NAME" || head == "OBJSENSE") {
                if (head == "OBJSENSE" && tok.size() > 1 && tok[1] != "MIN" && tok[1] != "MINIMIZE") {
                    fail("only minimization is supported");
                }
                section = Section::None;
            } else if (head == "ROWS") {
                section = Section::Rows;
            } else if (head == "COLUMNS") {
                section = Section::Columns;
            } else if (head == "RHS") {
                section = Section::Rhs;
            } else if (head == "BOUNDS") {
                section = Section::Bounds;
            } else if (head == "RANGES") {
                section = Section::Ranges;
            } else if (head == "ENDATA") {
                section = Section::End;
            } else {
                fail(fmt::format("unknown section '{}'", head));
            }
            continue;
        }
        switch (section) {
        case Section::Rows: {
            if (tok.size() != 2) {
                fail("row record needs type and name");
            }
            const auto type = tok[0];
            if (type == "N") {
                if (objective_row.empty()) {
                    objective_row = std::string(tok[1]);
                }
                break;
            }
            Sense s;
            if (type == "L") {
                s = Sense::LessEqual;
            } else if (type == "G") {
                s = Sense::GreaterEqual;
            } else if (type == "E") {
                s = Sense::Equal;
            } else {
                fail(fmt::format("unknown row type '{}'", type));
            }
            if (!row_index.emplace(std::string(tok[1]), rows.size()).second) {
                fail(fmt::format("duplicate row '{}'", tok[1]));
            }
            rows.push_back({std::string(tok[1]), s, 0.0, {}});
            break;
        }
        case Section::Columns: {
            if (tok.size() >= 3 && tok[1] == "'MARKER'") {
                fail("integer markers are not supported");
            }
            if (tok.size() != 3 && tok.size() != 5) {
                fail("column record needs 3 or 5 fields");
            }
            auto it = col_index.find(tok[0]);
            if (it == col_index.end()) {
                it = col_index.emplace(std::string(tok[0]), cols.size()).first;
                cols.push_back({std::string(tok[0])});
            }
            const auto col = it->second;
            for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
                const double v = number(tok[k + 1]);
                if (tok[k] == objective_row) {
                    cols[col].cost += v;
                    continue;
                }
                const auto r = row_index.find(tok[k]);
                if (r == row_index.end()) {
                    fail(fmt::format("unknown row '{}'", tok[k]));
                }
                rows[r->second].terms.push_back({col, v});
            }
            break;
        }
        case Section::Rhs: {
            if (tok.size() != 3 && tok.size() != 5) {
                fail("rhs record needs 3 or 5 fields");
            }
            for (std::size_t k = 1; k + 1 < tok.size(); k += 2) {
                if (tok[k] == objective_row) {
                    fail("objective constants are not supported");
                }
                const auto r = row_index.find(tok[k]);
                if (r == row_index.end()) {
                    fail(fmt::format("unknown row '{}'", tok[k]));
                }
                rows[r->second].rhs = number(tok[k + 1]);
            }
            break;
        }
        case Section::Bounds: {
            if (tok.size() < 3) {
                fail("bound record needs type, set and column");
            }
            const auto type = tok[0];
            const auto it = col_index.find(tok[2]);
            if (it == col_index.end()) {
                fail(fmt::format("bound on unknown column '{}'", tok[2]));
            }
            auto& c = cols[it->second];
            const bool has_value = tok.size() >= 4;
            if ((type == "UP" || type == "LO" || type == "FX") && !has_value) {
                fail("bound value missing");
            }
            if (type == "UP") {
                c.upper = number(tok[3]);
            } else if (type == "LO") {
                c.lower = number(tok[3]);
            } else if (type == "FX") {
                c.lower = c.upper = number(tok[3]);
            } else if (type == "FR") {
                c.lower = -kInf;
                c.upper = kInf;
            } else if (type == "MI") {
                c.lower = -kInf;
            } else if (type == "PL") {
                c.upper = kInf;
            } else {
                fail(fmt::format("unsupported bound type '{}'", type));
            }
            break;
        }
        case Section::Ranges:
            fail("RANGES are not supported");
            break;
        default:
            fail("record outside of a section");
        }
    }
    if (section != Section::End) {
        throw ValidationError("MPS: missing ENDATA");
    }

    LPProblem lp;
    for (const auto& c : cols) {
        lp.add_variable(c.name, c.lower, c.upper, c.cost);
    }
    for (auto& r : rows) {
        lp.add_row(r.name, r.sense, r.rhs, r.terms);
    }
    return lp;
}

LPProblem read_mps(const std::filesystem::path& path)
{
    return parse_mps(detail::read_text_file(path));
}

} // namespace atomgrid::lp
