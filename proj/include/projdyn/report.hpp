#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "projdyn/grassmann.hpp"
#include "projdyn/hermitian.hpp"
#include "projdyn/limit_sets.hpp"
#include "projdyn/orbit.hpp"

namespace projdyn {

struct ParseError : ValidationError {
    int line, col;
    ParseError(int line_, int col_, const std::string& what)
        : ValidationError("parse error at line " + std::to_string(line_) + ", col " +
                          std::to_string(col_) + ": " + what),
          line(line_),
          col(col_) {}
};
struct ShapeError : ValidationError {
    explicit ShapeError(const std::string& w = "ShapeError") : ValidationError(w) {}
};
struct NonFiniteEntry : ValidationError {
    explicit NonFiniteEntry(const std::string& w = "NonFiniteEntry") : ValidationError(w) {}
};
struct UnknownCommand : ValidationError {
    explicit UnknownCommand(const std::string& w = "UnknownCommand") : ValidationError(w) {}
};

struct MatrixDocument {
    int n_plus_1 = 0;
    Matrix matrix;
    std::optional<std::string> label;
};

MatrixDocument parse_matrix_document(const std::string& text);
MatrixDocument parse_matrix_file(const std::string& path);  // "-" reads stdin
std::string matrix_document_to_json(const MatrixDocument& doc);

// Effective settings for a CLI run; echoed verbatim into every report.
struct RunSettings {
    Tolerances tol;
    int iters = 400;
    int samples = 1000;
    int seeds = 100;
    std::uint64_t rng_seed = 20240901u;  // PROJDYN_SEED overrides
};

nlohmann::json classify_report(const MatrixDocument& doc, const RunSettings& rs);
nlohmann::json limitset_report(const MatrixDocument& doc, const RunSettings& rs);
nlohmann::json certify_report(const MatrixDocument& doc, const RunSettings& rs);
nlohmann::json simulate_report(const MatrixDocument& doc, const RunSettings& rs, std::string* csv_out);
nlohmann::json hermitian_selfcheck_report(int size, const RunSettings& rs);

enum class EmitFormat { Json, CsvSummary };
std::string emit_report(const nlohmann::json& report, EmitFormat format);

// The CLI entry point: argv without the program name. Writes the report to
// `out`, diagnostics to `err`; returns the process exit code (0 success,
// 2 validation failure, 3 numerical failure).
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace projdyn
