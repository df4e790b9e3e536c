#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace ibnr::cl {

enum class TriangleKind { incremental, cumulative };

enum class CellState : unsigned char { unobserved, observed, projected };

/**
 * Run-off triangle: accident years (rows) by development years (columns).
 *
 * With I = rows - 1, cell (i, j) is observed exactly when i + j <= I (the calendar
 * cutoff). Cells past the cutoff are either unobserved or hold a projection. Values are
 * kept at full precision; rounding happens only when rendering.
 */
class Triangle {
public:
    /// All cells past the staircase start unobserved; values of observed cells default to 0.
    Triangle(int origin_year, int rows, int cols, TriangleKind kind);

    [[nodiscard]] int origin_year() const noexcept { return origin_year_; }
    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] TriangleKind kind() const noexcept { return kind_; }
    /// Last accident-year index; also the calendar cutoff of the staircase.
    [[nodiscard]] int cutoff() const noexcept { return rows_ - 1; }

    [[nodiscard]] static bool in_staircase(int i, int j, int cutoff) noexcept { return i + j <= cutoff; }

    [[nodiscard]] CellState state(int i, int j) const;
    [[nodiscard]] bool has_value(int i, int j) const { return state(i, j) != CellState::unobserved; }
    [[nodiscard]] double value(int i, int j) const;
    [[nodiscard]] std::optional<double> get(int i, int j) const;

    /// Sets an observed cell; throws ValidationError outside the staircase.
    void set_observed(int i, int j, double v);
    /// Sets a projected cell; throws ValidationError inside the staircase.
    void set_projected(int i, int j, double v);
    /// Clears a cell past the staircase.
    void clear(int i, int j);

    void set_kind(TriangleKind k) noexcept { kind_ = k; }

    friend bool operator==(const Triangle&, const Triangle&) = default;

private:
    [[nodiscard]] std::size_t at(int i, int j) const;

    int origin_year_;
    int rows_;
    int cols_;
    TriangleKind kind_;
    std::vector<double> values_;
    std::vector<CellState> states_;
};

/// Volume-weighted development factors; factor(j) carries column j-1 to column j.
class DevFactors {
public:
    explicit DevFactors(std::vector<double> f);

    [[nodiscard]] std::size_t size() const noexcept { return f_.size(); }
    /// j = 1 .. size()
    [[nodiscard]] double factor(int j) const;
    [[nodiscard]] const std::vector<double>& values() const noexcept { return f_; }

private:
    std::vector<double> f_;
};

/// Row-wise prefix sums; the cell states are carried over unchanged.
Triangle to_cumulative(const Triangle& incremental);

/// Row-wise first differences.
Triangle to_incremental(const Triangle& cumulative);

/**
 * f_j = sum_i C[i][j] / sum_i C[i][j-1] over rows where both cells are observed.
 *
 * With include_projected the sums run over every filled cell instead, which is what a
 * projection consistency check on a completed triangle needs.
 */
DevFactors dev_factors(const Triangle& cumulative, bool include_projected = false);

/// Fills every cell past the latest observed diagonal with C[i][I-i] * prod f.
Triangle project(const Triangle& cumulative, const DevFactors& f);

/// Percentage errors |actual - predicted| * 100 / predicted; nullopt marks a blank cell.
struct ErrorTable {
    int origin_year = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::optional<double>> cells;

    [[nodiscard]] std::optional<double> at(int i, int j) const {
        return cells.at(static_cast<std::size_t>(i) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(j));
    }
    /// Mean over non-blank cells; nullopt when every cell is blank.
    [[nodiscard]] std::optional<double> mean() const;
};

/// Compares the projected cells of `predicted` with the same cells of `actual` (observed or
/// not). `actual` may extend past `predicted`, e.g. a later valuation of the same portfolio;
/// the table takes the predicted shape. Throws ValidationError if `actual` is smaller or the
/// origin years differ.
ErrorTable error_table(const Triangle& actual, const Triangle& predicted);

}  // namespace ibnr::cl
