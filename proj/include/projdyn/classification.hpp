#pragma once

#include <optional>
#include <vector>

#include "projdyn/linalg.hpp"

namespace projdyn {

enum class Kind { Elliptic, Parabolic, Loxodromic };

const char* kind_name(Kind k);

struct ClassificationResult {
    Kind kind;
    std::optional<long> finite_order;  // filled for elliptic when detected
    // evidence
    std::vector<double> moduli;  // one per eigenvalue cluster, ascending
    bool diagonalizable = true;
    bool marginal = false;  // some modulus within a factor-2 window of the unit_tol band edge
    double condition_estimate = 1.0;
};

ClassificationResult classify(const SLMatrix& g, const Tolerances& tol = {});

struct OrderDetection {
    std::optional<long> order;   // least m <= max_order with g^m scalar
    bool ratios_rational;        // all eigenvalue-ratio arguments rational multiples of 2*pi
};

OrderDetection finite_order(const SLMatrix& g, long max_order, const Tolerances& tol = {});

// Classification of the restriction of g to the line through two fixed
// points (which are necessarily eigendirections of the lift).
ClassificationResult line_restriction_class(const SLMatrix& g, const Vector& x, const Vector& y,
                                            const Tolerances& tol = {});

// Projective membership in PU(k,l): g^* J g = c J for a unit scalar c,
// J = diag(-I_k, I_l).
bool preserves_form(const SLMatrix& g, int k, int l, double tol = 1e-8);

// Ball-based classification of an element of PU(k,l): decided from the
// location of fixed points relative to the (k,l)-ball and from line
// restrictions, independently of the eigenvalue-modulus trichotomy.
struct PUClassification {
    Kind kind;
    Vector fixed_point_witness;  // negative type for elliptic, null otherwise
    int k, l;
};

PUClassification classify_pu(const SLMatrix& g, int k, int l, const Tolerances& tol = {});

Matrix pu_form_matrix(int k, int l);

}  // namespace projdyn
