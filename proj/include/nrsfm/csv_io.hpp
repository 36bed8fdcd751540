/* csv_io.hpp -- bit-exact CSV readers/writers for the file formats the CLI
 * exchanges: measurements (2F x P), shapes (3F x P), masks (F x P),
 * rotations (3F x 3). No headers, LF line endings, '.' radix, 17
 * significant digits on write. */

#ifndef NRSFM_CSV_IO_HPP
#define NRSFM_CSV_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nrsfm/types.hpp"

namespace nrsfm {

/* Parse failure carrying the 1-based row/column of the first offending cell. */
class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& path, int row, int col, const std::string& what)
        : std::runtime_error(path + ": row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": " + what),
          row_(row), col_(col) {}
    int row() const { return row_; }
    int col() const { return col_; }

private:
    int row_;
    int col_;
};

inline Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    int row_idx = 0;
    while (std::getline(in, line)) {
        ++row_idx;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (in.peek() == EOF) break;  // trailing newline
            throw CsvError(path, row_idx, 1, "empty row");
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        int col_idx = 0;
        while (std::getline(ss, cell, ',')) {
            ++col_idx;
            size_t pos = 0;
            double value = 0.0;
            try {
                value = std::stod(cell, &pos);
            } catch (const std::exception&) {
                throw CsvError(path, row_idx, col_idx, "not a number: '" + cell + "'");
            }
            while (pos < cell.size() && (cell[pos] == ' ' || cell[pos] == '\t')) ++pos;
            if (pos != cell.size())
                throw CsvError(path, row_idx, col_idx, "trailing garbage: '" + cell + "'");
            row.push_back(value);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw CsvError(path, row_idx, static_cast<int>(row.size()),
                           "ragged row (expected " + std::to_string(rows.front().size()) +
                               " columns)");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw CsvError(path, 1, 1, "file is empty");

    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[64];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out << buf;
            if (j + 1 < m.cols()) out << ',';
        }
        out << '\n';
    }
}

inline MeasurementMatrix read_measurements(const std::string& path) {
    Eigen::MatrixXd m = read_csv_matrix(path);
    if (m.rows() % 2 != 0)
        throw std::runtime_error(path + ": measurement file must have 2F rows, got " +
                                 std::to_string(m.rows()));
    return MeasurementMatrix(std::move(m));
}

inline void write_measurements(const std::string& path, const MeasurementMatrix& w) {
    write_csv_matrix(path, w.w);
}

inline ShapeSequence read_shape_sequence(const std::string& path,
                                         ShapeCoord coord = ShapeCoord::Canonical) {
    Eigen::MatrixXd m = read_csv_matrix(path);
    if (m.rows() % 3 != 0)
        throw std::runtime_error(path + ": shape file must have 3F rows, got " +
                                 std::to_string(m.rows()));
    return ShapeSequence(std::move(m), coord);
}

inline void write_shape_sequence(const std::string& path, const ShapeSequence& s) {
    write_csv_matrix(path, s.s);
}

inline VisibilityMask read_mask(const std::string& path) {
    Eigen::MatrixXd m = read_csv_matrix(path);
    Eigen::MatrixXi o(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (m(i, j) != 0.0 && m(i, j) != 1.0)
                throw CsvError(path, static_cast<int>(i) + 1, static_cast<int>(j) + 1,
                               "mask entries must be 0 or 1");
            o(i, j) = static_cast<int>(m(i, j));
        }
    VisibilityMask mask(std::move(o));
    mask.validate();
    return mask;
}

inline void write_mask(const std::string& path, const VisibilityMask& mask) {
    write_csv_matrix(path, mask.o.cast<double>());
}

inline RotationSequence read_rotations(const std::string& path) {
    Eigen::MatrixXd m = read_csv_matrix(path);
    if (m.cols() != 3 || m.rows() % 3 != 0)
        throw std::runtime_error(path + ": rotation file must be 3F x 3");
    std::vector<Eigen::Matrix3d> rots(m.rows() / 3);
    for (size_t i = 0; i < rots.size(); ++i)
        rots[i] = m.middleRows(3 * static_cast<Eigen::Index>(i), 3);
    return RotationSequence(std::move(rots));
}

inline void write_rotations(const std::string& path, const RotationSequence& rots) {
    Eigen::MatrixXd m(3 * rots.frames(), 3);
    for (int i = 0; i < rots.frames(); ++i) m.middleRows(3 * i, 3) = rots[i];
    write_csv_matrix(path, m);
}

}  // namespace nrsfm

#endif  // NRSFM_CSV_IO_HPP
