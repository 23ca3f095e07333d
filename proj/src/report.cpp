#include "projdyn/report.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

namespace projdyn {

using json = nlohmann::json;

namespace {

json complex_to_json(const cxd& z) { return json::array({z.real(), z.imag()}); }

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

json matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        out.push_back(row);
    }
    return out;
}

json subspace_to_json(const Subspace& s) {
    json out;
    out["ambient_dim"] = s.ambient_dim();
    out["dim"] = s.dim();
    out["projective_dim"] = s.projective_dim();
    json basis = json::array();
    for (int j = 0; j < s.basis().cols(); ++j) basis.push_back(vector_to_json(s.basis().col(j)));
    out["basis"] = basis;
    return out;
}

json limit_set_to_json(const LimitSet& ls) {
    json out;
    switch (ls.extent) {
        case SetExtent::Empty:
            out["kind"] = "empty";
            out["components"] = json::array();
            break;
        case SetExtent::WholeSpace:
            out["kind"] = "whole_space";
            out["components"] = "whole_space";
            break;
        case SetExtent::Proper: {
            out["kind"] = "union";
            json comps = json::array();
            for (const auto& c : ls.parts.components) comps.push_back(subspace_to_json(c));
            out["components"] = comps;
            break;
        }
    }
    return out;
}

json classification_to_json(const ClassificationResult& c, const OrderDetection* od) {
    json out;
    out["kind"] = kind_name(c.kind);
    out["moduli"] = c.moduli;
    out["diagonalizable"] = c.diagonalizable;
    out["marginal"] = c.marginal;
    out["condition_estimate"] = c.condition_estimate;
    if (c.finite_order)
        out["finite_order"] = *c.finite_order;
    else if (od && od->order)
        out["finite_order"] = *od->order;
    else
        out["finite_order"] = nullptr;
    if (od) out["ratios_rational"] = od->ratios_rational;
    return out;
}

json tolerances_to_json(const RunSettings& rs) {
    json out;
    out["det_tol"] = rs.tol.det_tol;
    out["unit_tol"] = rs.tol.unit_tol;
    out["cluster_tol"] = rs.tol.cluster_tol;
    out["rank_tol"] = rs.tol.rank_tol;
    out["cond_cap"] = rs.tol.cond_cap;
    out["null_band"] = rs.tol.null_band;
    out["fixed_tol"] = rs.tol.fixed_tol;
    out["max_order"] = rs.tol.max_order;
    out["iters"] = rs.iters;
    out["samples"] = rs.samples;
    out["seeds"] = rs.seeds;
    out["rng_seed"] = rs.rng_seed;
    return out;
}

cxd json_to_complex(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ShapeError("complex entries must be [re, im] number pairs");
    double re = j[0].get<double>(), im = j[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im)) throw NonFiniteEntry();
    return {re, im};
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

MatrixDocument parse_matrix_document(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // recover line/col from the byte offset
        int line = 1, col = 1;
        for (size_t i = 0; i < std::min(text.size(), static_cast<size_t>(e.byte)); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError(line, col, e.what());
    } catch (const json::out_of_range& e) {
        // number overflow while parsing (1e999 and friends)
        throw NonFiniteEntry(e.what());
    }
    if (!j.is_object() || !j.contains("matrix")) throw ShapeError("document must contain a \"matrix\"");
    const json& rows = j["matrix"];
    if (!rows.is_array() || rows.empty()) throw ShapeError("matrix must be a nonempty array of rows");
    const int n = static_cast<int>(rows.size());
    MatrixDocument doc;
    doc.matrix = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
            throw ShapeError("matrix rows are ragged or non-square");
        for (int c = 0; c < n; ++c) doc.matrix(i, c) = json_to_complex(rows[i][c]);
    }
    doc.n_plus_1 = n;
    if (j.contains("n_plus_1")) {
        if (!j["n_plus_1"].is_number_integer() || j["n_plus_1"].get<int>() != n)
            throw ShapeError("n_plus_1 does not match the matrix size");
    }
    if (j.contains("label")) {
        if (!j["label"].is_string()) throw ShapeError("label must be a string");
        doc.label = j["label"].get<std::string>();
    }
    return doc;
}

MatrixDocument parse_matrix_file(const std::string& path) {
    std::string text;
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        text = ss.str();
    } else {
        std::ifstream f(path);
        if (!f) throw ValidationError("cannot open input file: " + path);
        std::ostringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    return parse_matrix_document(text);
}

std::string matrix_document_to_json(const MatrixDocument& doc) {
    json j;
    j["n_plus_1"] = doc.n_plus_1;
    j["matrix"] = matrix_to_json(doc.matrix);
    if (doc.label) j["label"] = *doc.label;
    return j.dump(2);
}

namespace {

json base_report(const MatrixDocument& doc, const RunSettings& rs) {
    json out;
    out["label"] = doc.label ? json(*doc.label) : json(nullptr);
    out["n_plus_1"] = doc.n_plus_1;
    out["input_matrix"] = matrix_to_json(doc.matrix);
    out["tolerances"] = tolerances_to_json(rs);
    return out;
}

json unitary_to_json(const UnitaryDecomposition& ud) {
    json out;
    out["k"] = ud.k();
    json blocks = json::array();
    for (const auto& b : ud.blocks) {
        json jb;
        jb["radius"] = b.radius;
        jb["dim"] = b.space.dim();
        jb["subspace"] = subspace_to_json(b.space);
        jb["action"] = matrix_to_json(b.action);
        blocks.push_back(jb);
    }
    out["blocks"] = blocks;
    return out;
}

json block_dec_to_json(const BlockDecomposition& bd) {
    json out;
    out["k"] = bd.k();
    json blocks = json::array();
    for (const auto& b : bd.blocks) {
        json jb;
        jb["identity"] = b.is_identity;
        jb["eigenvalue"] = complex_to_json(b.eigenvalue);
        jb["dim"] = b.dim();
        jb["chain_basis"] = matrix_to_json(b.chain);
        blocks.push_back(jb);
    }
    out["blocks"] = blocks;
    return out;
}

}  // namespace

json classify_report(const MatrixDocument& doc, const RunSettings& rs) {
    SLMatrix g = normalize_to_sl(doc.matrix, rs.tol.det_tol);
    ClassificationResult cls = classify(g, rs.tol);
    OrderDetection od = finite_order(g, rs.tol.max_order, rs.tol);
    json out = base_report(doc, rs);
    out["sl_lift"] = matrix_to_json(g.matrix());
    out["classification"] = classification_to_json(cls, &od);
    json warnings = json::array();
    if (cls.marginal) warnings.push_back("marginal unitarity: some eigenvalue modulus sits near the decision band");
    out["warnings"] = warnings;
    return out;
}

json limitset_report(const MatrixDocument& doc, const RunSettings& rs) {
    SLMatrix g = normalize_to_sl(doc.matrix, rs.tol.det_tol);
    LimitSetReport rep = limit_report(g, rs.tol);
    json out = base_report(doc, rs);
    out["sl_lift"] = matrix_to_json(g.matrix());
    out["classification"] = classification_to_json(rep.classification, &rep.order);
    json sets;
    sets["lambda"] = limit_set_to_json(rep.lambda);
    sets["equicontinuity_complement"] = limit_set_to_json(rep.eq_complement);
    sets["kulkarni"] = limit_set_to_json(rep.kulkarni);
    out["limit_sets"] = sets;
    out["decompositions"] = json::object();
    out["decompositions"]["unitary"] = unitary_to_json(unitary_decomposition(g, rs.tol));
    if (rep.classification.kind == Kind::Parabolic || rep.classification.kind == Kind::Elliptic)
        out["decompositions"]["block"] = block_dec_to_json(block_decomposition(g.matrix(), rs.tol));
    if (rep.maximal) {
        json mr;
        json c1 = json::array(), c2 = json::array();
        for (const auto& c : rep.maximal->omega1_complement.components) c1.push_back(subspace_to_json(c));
        for (const auto& c : rep.maximal->omega2_complement.components) c2.push_back(subspace_to_json(c));
        mr["omega1_complement"] = c1;
        mr["omega2_complement"] = c2;
        out["maximal_regions"] = mr;
    } else {
        out["maximal_regions"] = nullptr;
    }
    out["warnings"] = rep.warnings;
    return out;
}

json certify_report(const MatrixDocument& doc, const RunSettings& rs) {
    SLMatrix g = normalize_to_sl(doc.matrix, rs.tol.det_tol);
    ClassificationResult cls = classify(g, rs.tol);
    json out = base_report(doc, rs);
    out["sl_lift"] = matrix_to_json(g.matrix());
    out["classification"] = classification_to_json(cls, nullptr);
    if (cls.kind == Kind::Parabolic) {
        ParabolicCertificate cert = parabolic_certificate(g, rs.tol);
        json jc;
        jc["type"] = "parabolic";
        jc["signature"] = json::array({cert.form_signature.first, cert.form_signature.second});
        jc["base"] = matrix_to_json(cert.base);
        jc["direction"] = matrix_to_json(cert.direction);
        jc["Z"] = subspace_to_json(cert.Z);
        jc["W"] = subspace_to_json(cert.W);
        jc["block_structure"] = block_dec_to_json(cert.blocks);
        out["certificate"] = jc;
    } else if (cls.kind == Kind::Loxodromic) {
        LoxodromicCertificate cert = loxodromic_certificate(g, rs.tol, rs.samples > 64 ? 32 : rs.samples, rs.rng_seed);
        json jc;
        jc["type"] = "loxodromic";
        jc["grassmann_k"] = cert.grassmann_k;
        jc["attracting_subspace"] = subspace_to_json(cert.attracting_subspace);
        jc["attracting_point_plucker"] = vector_to_json(cert.attracting_point);
        jc["radius"] = cert.radius;
        jc["contraction_margin"] = cert.contraction_margin;
        jc["boundary_samples"] = cert.boundary_samples;
        jc["excluded_witness"] = vector_to_json(cert.excluded_witness);
        jc["witness_margin"] = cert.witness_margin;
        out["certificate"] = jc;
    } else {
        throw ValidationError("certify: elliptic elements carry no parabolic or loxodromic certificate");
    }
    return out;
}

json simulate_report(const MatrixDocument& doc, const RunSettings& rs, std::string* csv_out) {
    SLMatrix g = normalize_to_sl(doc.matrix, rs.tol.det_tol);
    json out = base_report(doc, rs);
    out["sl_lift"] = matrix_to_json(g.matrix());
    ClassificationResult cls = classify(g, rs.tol);
    OrderDetection od = finite_order(g, rs.tol.max_order, rs.tol);
    out["classification"] = classification_to_json(cls, &od);
    LimitSet lambda = lambda_set(g, rs.tol);
    out["lambda"] = limit_set_to_json(lambda);

    std::mt19937_64 rng(rs.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vector> seeds;
    for (int s = 0; s < rs.seeds; ++s) {
        Vector v(g.size());
        for (int i = 0; i < g.size(); ++i) v(i) = cxd(gauss(rng), gauss(rng));
        seeds.push_back(v.normalized());
    }
    OrbitRun run = orbit_accumulate(g, seeds, rs.iters, {});

    json jr;
    jr["iterations"] = run.iterations;
    jr["schedule_max"] = run.schedule.empty() ? 0L : run.schedule.back();
    jr["transients"] = run.transients;
    json clusters = json::array();
    for (const auto& c : run.cluster_points) {
        json jc;
        jc["point"] = vector_to_json(c.point);
        jc["count"] = c.count;
        clusters.push_back(jc);
    }
    jr["cluster_points"] = clusters;
    out["orbit_run"] = jr;

    if (lambda.extent == SetExtent::Proper) {
        std::vector<Vector> pts;
        for (const auto& c : run.cluster_points) pts.push_back(c.point);
        out["oracle"] = json{{"hausdorff_to_lambda", hausdorff_to_union(pts, lambda.parts)}};
    } else {
        out["oracle"] = json{{"hausdorff_to_lambda", nullptr}};
    }

    if (csv_out) {
        std::ostringstream csv;
        csv << "m,metric_name,value\n";
        if (lambda.extent == SetExtent::Proper) {
            Matrix fwd = Matrix::Identity(g.size(), g.size());
            // distance of the pushed-forward seed set to the predicted set,
            // per consecutive power (plot-ready convergence data)
            const long csv_steps = std::min<long>(rs.iters, 500);
            for (long m = 1; m <= csv_steps; ++m) {
                fwd = fwd * g.matrix();
                fwd /= fwd.cwiseAbs().maxCoeff();
                double worst = 0.0;
                for (const auto& s : seeds) {
                    Vector p = (fwd * s).normalized();
                    double best = std::numeric_limits<double>::infinity();
                    for (const auto& c : lambda.parts.components)
                        best = std::min(best, point_to_subspace_angle(p, c));
                    worst = std::max(worst, best);
                }
                csv << m << ",distance_to_lambda," << worst << "\n";
            }
        }
        *csv_out = csv.str();
    }
    return out;
}

json hermitian_selfcheck_report(int size, const RunSettings& rs) {
    HermitianFormFamily fam = parabolic_form_family(size);
    json out;
    out["size"] = size;
    out["parity"] = fam.odd ? "odd" : "even";
    out["tolerances"] = tolerances_to_json(rs);
    auto expected = fam.expected_signature();
    out["expected_signature"] = json::array({expected.first, expected.second});

    std::mt19937_64 rng(rs.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_vec = [&](int n) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = cxd(gauss(rng), gauss(rng));
        return v;
    };
    auto qval = [](const Matrix& c, const Vector& z) { return (z.adjoint() * c * z)(0, 0).real(); };

    // 1: e1 lies in every quadric
    bool p1 = true;
    for (double r : {-5.0, 0.0, 7.0}) {
        Vector e1 = Vector::Zero(size);
        e1(0) = cxd(1, 0);
        p1 = p1 && std::abs(qval(fam.at(r), e1)) == 0.0;
    }
    out["e1_membership"] = p1;

    // 2: pairwise intersections lie in the hyperplane z_n = 0 (sampled)
    bool p2 = true;
    double worst_residual = 0.0;
    for (int s = 0; s < rs.samples; ++s) {
        Vector z = random_vec(size);
        double e = std::norm(z(size - 1));
        if (e < 1e-12) continue;
        double rstar = -qval(fam.base, z) / e;
        worst_residual = std::max(worst_residual, std::abs(qval(fam.at(rstar), z)));
        // a second distinct parameter must miss z unless z_n = 0
        double rs2 = rstar + 1.0 + std::abs(rstar);
        if (std::abs(qval(fam.at(rs2), z)) <= 1e-12 * z.squaredNorm()) p2 = false;
    }
    p2 = p2 && worst_residual <= 1e-10;
    out["pairwise_intersection_in_hyperplane"] = p2;
    out["intersection_residual"] = worst_residual;

    // 3: covering: every sampled point off the hyperplane solves a real r
    bool p3 = true;
    int w_locus = 0;
    for (int s = 0; s < rs.samples; ++s) {
        Vector z = random_vec(size);
        double e = std::norm(z(size - 1));
        if (e <= 1e-9 * z.squaredNorm()) {
            ++w_locus;
            continue;
        }
        double rstar = -qval(fam.base, z) / e;
        if (!std::isfinite(rstar) || std::abs(qval(fam.at(rstar), z)) > 1e-9 * z.squaredNorm()) p3 = false;
    }
    out["covering"] = p3;
    out["covering_w_locus"] = w_locus;

    // 4: constant signature
    bool p4 = true;
    for (double r : {-10.0, -1.0, 0.0, 1.0, 10.0}) {
        Signature sig = signature(fam.at(r), 1e-9);
        if (sig.neg != expected.first || sig.pos != expected.second || sig.zero != 0) p4 = false;
    }
    out["constant_signature"] = p4;

    // 5: exact invariance in Gaussian-integer arithmetic
    bool p5 = family_invariance_exact(fam, {-10, -1, 0, 1, 10});
    out["exact_invariance"] = p5;

    out["all_pass"] = p1 && p2 && p3 && p4 && p5;
    return out;
}

std::string emit_report(const json& report, EmitFormat format) {
    if (format == EmitFormat::Json) return report.dump(2) + "\n";
    // csv-summary: one row per computed set component
    std::ostringstream csv;
    csv << "set,component,projective_dim,basis_digest\n";
    auto emit_set = [&](const std::string& name, const json& ls) {
        if (!ls.is_object() || !ls.contains("components")) return;
        const json& comps = ls["components"];
        if (!comps.is_array()) {
            csv << name << ",whole_space,,\n";
            return;
        }
        if (comps.empty()) {
            csv << name << ",empty,,\n";
            return;
        }
        for (size_t i = 0; i < comps.size(); ++i) {
            std::ostringstream digest;
            digest << std::hex << fnv1a(comps[i]["basis"].dump());
            csv << name << "," << i << "," << comps[i]["projective_dim"].get<int>() << "," << digest.str()
                << "\n";
        }
    };
    if (report.contains("limit_sets")) {
        emit_set("lambda", report["limit_sets"]["lambda"]);
        emit_set("equicontinuity_complement", report["limit_sets"]["equicontinuity_complement"]);
        emit_set("kulkarni", report["limit_sets"]["kulkarni"]);
    }
    if (report.contains("lambda")) emit_set("lambda", report["lambda"]);
    return csv.str();
}

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"projdyn: classification and dynamical invariants of complex projective transformations"};
    app.require_subcommand(0, 1);

    RunSettings rs;
    if (const char* env = std::getenv("PROJDYN_SEED")) rs.rng_seed = std::strtoull(env, nullptr, 10);

    app.add_option("--unit-tol", rs.tol.unit_tol, "unitarity band for eigenvalue moduli");
    app.add_option("--cluster-tol", rs.tol.cluster_tol, "relative eigenvalue clustering radius");
    app.add_option("--det-tol", rs.tol.det_tol, "determinant normalization band");
    app.add_option("--max-order", rs.tol.max_order, "finite-order search cap");
    app.add_option("--iters", rs.iters, "orbit exponents sampled per seed and direction");
    app.add_option("--samples", rs.samples, "sample count for sampled checks");
    app.add_option("--seed", rs.rng_seed, "RNG seed (overrides PROJDYN_SEED)");

    std::string file;
    std::string csv_path;
    int size = 5;
    std::string emit = "json";

    auto add_file_opt = [&](CLI::App* sub) {
        sub->add_option("file", file, "matrix document path, or - for stdin")->required();
        sub->add_option("--emit", emit, "output format: json | csv-summary");
    };
    CLI::App* c_classify = app.add_subcommand("classify", "classify an element of PSL(n+1,C)");
    add_file_opt(c_classify);
    CLI::App* c_limitset = app.add_subcommand("limitset", "limit sets and maximal regions");
    add_file_opt(c_limitset);
    CLI::App* c_certify = app.add_subcommand("certify", "algebraic certificate for the element's kind");
    add_file_opt(c_certify);
    CLI::App* c_simulate = app.add_subcommand("simulate", "orbit simulation against the predicted sets");
    add_file_opt(c_simulate);
    c_simulate->add_option("--seeds", rs.seeds, "number of random projective seeds");
    c_simulate->add_option("--csv", csv_path, "write convergence CSV (m,metric_name,value) to this path");
    CLI::App* c_hermitian = app.add_subcommand("hermitian", "hermitian form tooling");
    CLI::App* c_selfcheck = c_hermitian->add_subcommand("selfcheck", "check the invariant quadric family");
    c_selfcheck->add_option("--size", size, "Jordan block size")->required();

    std::vector<std::string> args(argv.rbegin(), argv.rend());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return 0;
        }
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (app.get_subcommands().empty()) {
            out << app.help();
            return 0;
        }
        json report;
        std::string csv;
        if (c_classify->parsed()) {
            report = classify_report(parse_matrix_file(file), rs);
        } else if (c_limitset->parsed()) {
            report = limitset_report(parse_matrix_file(file), rs);
        } else if (c_certify->parsed()) {
            report = certify_report(parse_matrix_file(file), rs);
        } else if (c_simulate->parsed()) {
            report = simulate_report(parse_matrix_file(file), rs, &csv);
            if (!csv_path.empty()) {
                std::ofstream f(csv_path);
                if (!f) throw ValidationError("cannot open CSV output path: " + csv_path);
                f << csv;
            }
        } else if (c_hermitian->parsed()) {
            if (!c_selfcheck->parsed()) throw UnknownCommand("hermitian requires the selfcheck subcommand");
            report = hermitian_selfcheck_report(size, rs);
            for (const char* key : {"e1_membership", "pairwise_intersection_in_hyperplane", "covering",
                                    "constant_signature", "exact_invariance"})
                err << (report[key].get<bool>() ? "[PASS] " : "[FAIL] ") << key << "\n";
            out << emit_report(report, EmitFormat::Json);
            return report["all_pass"].get<bool>() ? 0 : 3;
        } else {
            throw UnknownCommand();
        }
        out << emit_report(report, emit == "csv-summary" ? EmitFormat::CsvSummary : EmitFormat::Json);
        return 0;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace projdyn
