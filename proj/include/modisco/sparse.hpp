#pragma once
// Row-wise sparse square matrix; each row keeps (column, value) sorted by column.

#include <cstddef>
#include <utility>
#include <vector>

namespace modisco {

struct SparseRows {
    using Entry = std::pair<std::size_t, double>;
    std::vector<std::vector<Entry>> rows;

    SparseRows() = default;
    explicit SparseRows(std::size_t n) : rows(n) {}
    std::size_t size() const { return rows.size(); }
};

}  // namespace modisco
