#include "ibnr/chain_ladder.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "ibnr/errors.hpp"

namespace ibnr::cl {

namespace {

std::string cell_name(int i, int j) {
    return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

}  // namespace

Triangle::Triangle(int origin_year, int rows, int cols, TriangleKind kind)
    : origin_year_(origin_year), rows_(rows), cols_(cols), kind_(kind) {
    if (rows < 1 || cols < 1) {
        throw ValidationError("triangle needs at least one row and one column");
    }
    const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    values_.assign(n, 0.0);
    states_.assign(n, CellState::unobserved);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (in_staircase(i, j, cutoff())) {
                states_[at(i, j)] = CellState::observed;
            }
        }
    }
}

std::size_t Triangle::at(int i, int j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_) {
        throw ValidationError("triangle cell " + cell_name(i, j) + " out of range");
    }
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(j);
}

CellState Triangle::state(int i, int j) const {
    return states_[at(i, j)];
}

double Triangle::value(int i, int j) const {
    const auto k = at(i, j);
    if (states_[k] == CellState::unobserved) {
        throw ValidationError("triangle cell " + cell_name(i, j) + " has no value");
    }
    return values_[k];
}

std::optional<double> Triangle::get(int i, int j) const {
    const auto k = at(i, j);
    if (states_[k] == CellState::unobserved) {
        return std::nullopt;
    }
    return values_[k];
}

void Triangle::set_observed(int i, int j, double v) {
    if (!in_staircase(i, j, cutoff())) {
        throw ValidationError("cell " + cell_name(i, j) + " lies past the calendar cutoff and cannot be observed");
    }
    values_[at(i, j)] = v;
}

void Triangle::set_projected(int i, int j, double v) {
    if (in_staircase(i, j, cutoff())) {
        throw ValidationError("cell " + cell_name(i, j) + " is observed and cannot hold a projection");
    }
    const auto k = at(i, j);
    values_[k] = v;
    states_[k] = CellState::projected;
}

void Triangle::clear(int i, int j) {
    if (in_staircase(i, j, cutoff())) {
        throw ValidationError("cell " + cell_name(i, j) + " is observed and cannot be cleared");
    }
    const auto k = at(i, j);
    values_[k] = 0.0;
    states_[k] = CellState::unobserved;
}

DevFactors::DevFactors(std::vector<double> f) : f_(std::move(f)) {
    for (double x : f_) {
        if (!(x > 0.0) || !std::isfinite(x)) {
            throw ValidationError("development factors must be finite and positive");
        }
    }
}

double DevFactors::factor(int j) const {
    if (j < 1 || static_cast<std::size_t>(j) > f_.size()) {
        throw ValidationError("development factor index " + std::to_string(j) + " out of range");
    }
    return f_[static_cast<std::size_t>(j - 1)];
}

Triangle to_cumulative(const Triangle& incremental) {
    if (incremental.kind() != TriangleKind::incremental) {
        throw ValidationError("to_cumulative expects an incremental triangle");
    }
    Triangle out = incremental;
    out.set_kind(TriangleKind::cumulative);
    for (int i = 0; i < out.rows(); ++i) {
        double running = 0.0;
        for (int j = 0; j < out.cols() && incremental.has_value(i, j); ++j) {
            running += incremental.value(i, j);
            if (incremental.state(i, j) == CellState::observed) {
                out.set_observed(i, j, running);
            } else {
                out.set_projected(i, j, running);
            }
        }
    }
    return out;
}

Triangle to_incremental(const Triangle& cumulative) {
    if (cumulative.kind() != TriangleKind::cumulative) {
        throw ValidationError("to_incremental expects a cumulative triangle");
    }
    Triangle out = cumulative;
    out.set_kind(TriangleKind::incremental);
    for (int i = 0; i < out.rows(); ++i) {
        double prev = 0.0;
        for (int j = 0; j < out.cols() && cumulative.has_value(i, j); ++j) {
            const double c = cumulative.value(i, j);
            if (cumulative.state(i, j) == CellState::observed) {
                out.set_observed(i, j, c - prev);
            } else {
                out.set_projected(i, j, c - prev);
            }
            prev = c;
        }
    }
    return out;
}

DevFactors dev_factors(const Triangle& cumulative, bool include_projected) {
    if (cumulative.kind() != TriangleKind::cumulative) {
        throw ValidationError("development factors need a cumulative triangle");
    }
    auto usable = [&](int i, int j) {
        const CellState s = cumulative.state(i, j);
        return s == CellState::observed || (include_projected && s == CellState::projected);
    };
    std::vector<double> f;
    for (int j = 1; j < cumulative.cols(); ++j) {
        double num = 0.0;
        double den = 0.0;
        int pairs = 0;
        for (int i = 0; i < cumulative.rows(); ++i) {
            if (usable(i, j) && usable(i, j - 1)) {
                num += cumulative.value(i, j);
                den += cumulative.value(i, j - 1);
                ++pairs;
            }
        }
        if (pairs == 0) {
            throw ValidationError("development year " + std::to_string(j) + " has no observed pair of cells");
        }
        if (den == 0.0) {
            throw ValidationError("development factor " + std::to_string(j) + " divides by a zero column sum");
        }
        f.push_back(num / den);
    }
    return DevFactors(std::move(f));
}

Triangle project(const Triangle& cumulative, const DevFactors& f) {
    if (cumulative.kind() != TriangleKind::cumulative) {
        throw ValidationError("projection needs a cumulative triangle");
    }
    if (f.size() != static_cast<std::size_t>(cumulative.cols() - 1)) {
        throw ValidationError("expected " + std::to_string(cumulative.cols() - 1) + " development factors, got " +
                              std::to_string(f.size()));
    }
    Triangle out = cumulative;
    for (int i = 0; i < out.rows(); ++i) {
        const int latest = out.cutoff() - i;
        if (latest >= out.cols() - 1) {
            continue;
        }
        if (cumulative.state(i, latest) != CellState::observed) {
            throw ValidationError("accident year " + std::to_string(out.origin_year() + i) +
                                  " is missing its latest diagonal cell");
        }
        double c = cumulative.value(i, latest);
        for (int j = latest + 1; j < out.cols(); ++j) {
            c *= f.factor(j);
            out.set_projected(i, j, c);
        }
    }
    return out;
}

std::optional<double> ErrorTable::mean() const {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : cells) {
        if (c) {
            sum += *c;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / n;
}

ErrorTable error_table(const Triangle& actual, const Triangle& predicted) {
    if (actual.rows() < predicted.rows() || actual.cols() < predicted.cols() ||
        actual.origin_year() != predicted.origin_year()) {
        throw ValidationError("error table needs an actual triangle covering the predicted one (" +
                              std::to_string(actual.rows()) + "x" + std::to_string(actual.cols()) + " from " +
                              std::to_string(actual.origin_year()) + " vs " + std::to_string(predicted.rows()) + "x" +
                              std::to_string(predicted.cols()) + " from " + std::to_string(predicted.origin_year()) +
                              ")");
    }
    ErrorTable out{predicted.origin_year(), predicted.rows(), predicted.cols(), {}};
    out.cells.resize(static_cast<std::size_t>(out.rows) * static_cast<std::size_t>(out.cols));
    for (int i = 0; i < out.rows; ++i) {
        for (int j = 0; j < out.cols; ++j) {
            if (predicted.state(i, j) != CellState::projected || !actual.has_value(i, j)) {
                continue;
            }
            const double p = predicted.value(i, j);
            if (p == 0.0) {
                continue;
            }
            out.cells[static_cast<std::size_t>(i * out.cols + j)] = std::abs(actual.value(i, j) - p) * 100.0 / p;
        }
    }
    return out;
}

}  // namespace ibnr::cl
