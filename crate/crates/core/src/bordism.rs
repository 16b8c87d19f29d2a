//! Complexes with boundary, their boundary complexes, and the checks behind
//! bordism invariance of the signature.
//!
//! Internally every total operator is rewritten in split coordinates, with
//! all of `E₀` (degree by degree) first and all of `E₁` after it. In those
//! coordinates
//!
//! ```text
//! b = [[b₀, h], [f, b₁]]      S = [[S₂, F], [F*, S₁]]
//! ```
//!
//! and `f` must vanish.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hpcomplex::{
    mapping_cone, verify_complex, ComplexReport, verify_duality, ChainComplex, DualityOperator, Grading, HilbertPoincareComplex,
};
use crate::signature::{check_coincidence, CoincidenceReport};
use crate::ktheory::CHARACTER_TOL;
use crate::spectral::{hermitian_is_invertible, identity, norm, rank, threshold, zeros, CMatrix, I, ONE};

/// A chain complex of top degree `m` with a designated subcomplex `E₀`
/// (given by coordinate indices per degree) and a duality `S_k: E_{m−k} → E_k`
/// that is only required to be a chain map modulo `E₀`.
#[derive(Clone, Debug)]
pub struct ComplexWithBoundary {
    complex: ChainComplex,
    duality: DualityOperator,
    boundary: Vec<Vec<usize>>,
}

impl ComplexWithBoundary {
    pub fn new(complex: ChainComplex, duality: DualityOperator, boundary: Vec<Vec<usize>>) -> Result<Self> {
        let dims = complex.dims();
        if complex.top_degree() == 0 {
            return Err(Error::SplitInconsistent("a complex with boundary needs top degree at least 1".into()));
        }
        if boundary.len() != dims.len() {
            return Err(Error::SplitInconsistent(format!(
                "boundary split lists {} degrees, complex has {}",
                boundary.len(),
                dims.len()
            )));
        }
        for (k, idx) in boundary.iter().enumerate() {
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::SplitInconsistent(format!(
                    "boundary indices in degree {k} must be strictly increasing"
                )));
            }
            if let Some(&i) = idx.iter().find(|&&i| i >= dims[k]) {
                return Err(Error::SplitInconsistent(format!(
                    "boundary index {i} out of range in degree {k} of dimension {}",
                    dims[k]
                )));
            }
        }
        if !boundary[complex.top_degree()].is_empty() {
            return Err(Error::SplitInconsistent("the boundary has no top-degree part".into()));
        }
        HilbertPoincareComplex::new(complex.clone(), duality.clone(), None)?;
        Ok(ComplexWithBoundary {
            complex,
            duality,
            boundary,
        })
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn duality(&self) -> &DualityOperator {
        &self.duality
    }

    pub fn boundary(&self) -> &[Vec<usize>] {
        &self.boundary
    }

    pub fn top_degree(&self) -> usize {
        self.complex.top_degree()
    }

    pub fn boundary_dims(&self) -> Vec<usize> {
        self.boundary.iter().map(Vec::len).collect()
    }

    pub fn interior_dims(&self) -> Vec<usize> {
        self.complex
            .dims()
            .iter()
            .zip(&self.boundary)
            .map(|(d, b)| d - b.len())
            .collect()
    }

    /// Permutation matrix `P` with `P x` in split coordinates.
    fn split_permutation(&self) -> CMatrix {
        let g = self.complex.grading();
        let n = g.total();
        let mut order = Vec::with_capacity(n);
        for (k, idx) in self.boundary.iter().enumerate() {
            order.extend(idx.iter().map(|&i| g.range(k).start + i));
        }
        for (k, idx) in self.boundary.iter().enumerate() {
            order.extend(g.range(k).filter(|x| !idx.contains(&(x - g.range(k).start))));
        }
        let mut p = zeros(n, n);
        for (row, &col) in order.iter().enumerate() {
            p[(row, col)] = ONE;
        }
        p
    }
}

fn sub(m: &CMatrix, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> CMatrix {
    m.view((rows.start, cols.start), (rows.len(), cols.len())).into_owned()
}

/// A named identity with its residual.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityResidual {
    pub identity: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl IdentityResidual {
    fn new(identity: &'static str, residual: f64, threshold: f64) -> Self {
        IdentityResidual {
            identity,
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }
}

/// Blocks of `b` and `S` in split coordinates, as total operators between
/// `E₀` and `E₁`.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub boundary: Grading,
    pub interior: Grading,
    pub b0: CMatrix,
    pub b1: CMatrix,
    pub h: CMatrix,
    pub s1: CMatrix,
    pub s2: CMatrix,
    pub f: CMatrix,
    pub identities: Vec<IdentityResidual>,
}

impl BlockDecomposition {
    fn total_b(&self) -> CMatrix {
        let (n0, n1) = (self.boundary.total(), self.interior.total());
        let mut b = zeros(n0 + n1, n0 + n1);
        b.view_mut((0, 0), (n0, n0)).copy_from(&self.b0);
        b.view_mut((0, n0), (n0, n1)).copy_from(&self.h);
        b.view_mut((n0, n0), (n1, n1)).copy_from(&self.b1);
        b
    }

    fn total_s(&self) -> CMatrix {
        let (n0, n1) = (self.boundary.total(), self.interior.total());
        let mut s = zeros(n0 + n1, n0 + n1);
        s.view_mut((0, 0), (n0, n0)).copy_from(&self.s2);
        s.view_mut((0, n0), (n0, n1)).copy_from(&self.f);
        s.view_mut((n0, 0), (n1, n0)).copy_from(&self.f.adjoint());
        s.view_mut((n0, n0), (n1, n1)).copy_from(&self.s1);
        s
    }

    /// `S₀` as the restriction of `bS + Sb*` to `E₀`.
    pub fn s0_restriction(&self) -> CMatrix {
        let b = self.total_b();
        let s = self.total_s();
        let x = &b * &s + &s * b.adjoint();
        let n0 = self.boundary.total();
        sub(&x, 0..n0, 0..n0)
    }

    /// `S₀ = b₀S₂ + S₂b₀* + hF* + Fh*`.
    pub fn s0_closed_form(&self) -> CMatrix {
        &self.b0 * &self.s2 + &self.s2 * self.b0.adjoint() + &self.h * self.f.adjoint() + &self.f * self.h.adjoint()
    }
}

/// Extract the blocks and check the three chain-homotopy identities
/// `b₀h + hb₁ = 0`, `b₁F* + F*b₀* = −S₁h*`, `b₀F + Fb₁* = −hS₁`.
pub fn decompose(cwb: &ComplexWithBoundary, tol: f64) -> Result<BlockDecomposition> {
    let p = cwb.split_permutation();
    let g = cwb.complex.grading();
    let b = &p * cwb.complex.total_differential() * p.transpose();
    let s = &p * cwb.duality.total(&g) * p.transpose();
    let boundary = Grading::new(&cwb.boundary_dims());
    let interior = Grading::new(&cwb.interior_dims());
    let (n0, n) = (boundary.total(), g.total());

    let lower_left = sub(&b, n0..n, 0..n0);
    let leak = norm(&lower_left);
    if leak > threshold(tol, norm(&b)) {
        return Err(Error::SplitInconsistent(format!(
            "the differential does not preserve the boundary subcomplex (residual {leak:.3e})"
        )));
    }
    let s_asym = norm(&(sub(&s, n0..n, 0..n0) - sub(&s, 0..n0, n0..n).adjoint()));
    if s_asym > threshold(tol, norm(&s)) {
        return Err(Error::NotSelfAdjoint {
            residual: s_asym,
            threshold: threshold(tol, norm(&s)),
        });
    }
    let d = BlockDecomposition {
        b0: sub(&b, 0..n0, 0..n0),
        h: sub(&b, 0..n0, n0..n),
        b1: sub(&b, n0..n, n0..n),
        s2: sub(&s, 0..n0, 0..n0),
        f: sub(&s, 0..n0, n0..n),
        s1: sub(&s, n0..n, n0..n),
        boundary,
        interior,
        identities: Vec::new(),
    };
    let scale = norm(&b) * norm(&s);
    let ch1 = &d.b0 * &d.h + &d.h * &d.b1;
    let fs = d.f.adjoint();
    let ch2 = &d.b1 * &fs + &fs * d.b0.adjoint() + &d.s1 * d.h.adjoint();
    let ch3 = &d.b0 * &d.f + &d.f * d.b1.adjoint() + &d.h * &d.s1;
    let identities = vec![
        IdentityResidual::new("b0 h + h b1 = 0", norm(&ch1), threshold(tol, norm(&b) * norm(&b))),
        IdentityResidual::new("b1 F* + F* b0* = -S1 h*", norm(&ch2), threshold(tol, scale)),
        IdentityResidual::new("b0 F + F b1* = -h S1", norm(&ch3), threshold(tol, scale)),
    ];
    if let Some(bad) = identities.iter().find(|r| !r.passed) {
        return Err(Error::IdentityViolated {
            identity: bad.identity,
            residual: bad.residual,
        });
    }
    Ok(BlockDecomposition { identities, ..d })
}

/// Report on the defining conditions of a complex with boundary.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryConditionsReport {
    pub complex: ComplexReport,
    pub boundary_preserved: IdentityResidual,
    pub self_adjoint: IdentityResidual,
    /// `‖j(bS + Sb*)‖`: the image of `bS + Sb*` lies in `E₀`.
    pub quotient_chain_condition: IdentityResidual,
    /// `‖(bS + Sb*)|_{E₀}‖`, reported for information only.
    pub restricted_to_boundary: f64,
    /// Smallest singular value of the cone operator of `jS: (E, −b*) → (E/E₀, b₁)`.
    pub quotient_cone_min_singular_value: f64,
    pub quotient_cone_threshold: f64,
    pub passed: bool,
}

impl BoundaryConditionsReport {
    pub fn failure(&self) -> Option<Error> {
        if let Some(r) = self.complex.residuals.iter().find(|r| !r.passed) {
            return Some(Error::BoundaryConditionViolated {
                condition: "b^2 = 0",
                detail: format!("residual {:.3e} in degree {}", r.residual, r.degree),
            });
        }
        if !self.boundary_preserved.passed {
            return Some(Error::BoundaryConditionViolated {
                condition: "(i) b preserves E0",
                detail: format!("residual {:.3e}", self.boundary_preserved.residual),
            });
        }
        if !self.self_adjoint.passed {
            return Some(Error::BoundaryConditionViolated {
                condition: "S self-adjoint",
                detail: format!("residual {:.3e}", self.self_adjoint.residual),
            });
        }
        if !self.quotient_chain_condition.passed {
            return Some(Error::BoundaryConditionViolated {
                condition: "(ii) j(bS + Sb*) = 0",
                detail: format!("residual {:.3e}", self.quotient_chain_condition.residual),
            });
        }
        if self.quotient_cone_min_singular_value <= self.quotient_cone_threshold {
            return Some(Error::BoundaryConditionViolated {
                condition: "(iii) jS induces an isomorphism onto the homology of E/E0",
                detail: format!(
                    "cone operator has smallest singular value {:.3e}",
                    self.quotient_cone_min_singular_value
                ),
            });
        }
        None
    }
}

/// Check `b² = 0`, that `b` preserves `E₀`, `S = S*`, `j(bS + Sb*) = 0` and
/// invertibility of the cone operator of `jS` onto the quotient complex.
pub fn verify_boundary_conditions(cwb: &ComplexWithBoundary, tol: f64) -> Result<BoundaryConditionsReport> {
    let complex_report = verify_complex(&cwb.complex, tol);
    let p = cwb.split_permutation();
    let g = cwb.complex.grading();
    let b = &p * cwb.complex.total_differential() * p.transpose();
    let s = &p * cwb.duality.total(&g) * p.transpose();
    let n0: usize = cwb.boundary_dims().iter().sum();
    let n = g.total();

    let boundary_preserved = IdentityResidual::new(
        "f = 0",
        norm(&sub(&b, n0..n, 0..n0)),
        threshold(tol, norm(&b)),
    );
    let self_adjoint = IdentityResidual::new("S = S*", norm(&(&s - s.adjoint())), threshold(tol, norm(&s)));
    let x = &b * &s + &s * b.adjoint();
    let quotient_chain_condition = IdentityResidual::new(
        "j(bS + Sb*) = 0",
        norm(&sub(&x, n0..n, 0..n)),
        threshold(tol, norm(&b) * norm(&s)),
    );
    let restricted_to_boundary = norm(&sub(&x, 0..n, 0..n0));

    // jS as a map from (E, −b*) to the quotient (E₁, b₁)
    let m = cwb.top_degree();
    let interior = Grading::new(&cwb.interior_dims());
    let b1_total = sub(&b, n0..n, n0..n);
    let js_split = sub(&s, n0..n, 0..n);
    let js = &js_split * &p;
    let quotient = ChainComplex::new(
        cwb.interior_dims(),
        (1..=m).map(|k| interior.block(&b1_total, &interior, k - 1, k)).collect(),
    )?;
    let dual = crate::hpcomplex::dual_complex(&cwb.complex);
    let src = ChainComplex::new(dual.dims().to_vec(), dual.differentials().iter().map(|d| -d).collect())?;
    let a: Vec<CMatrix> = (0..=m).map(|k| interior.block(&js, &g, k, m - k)).collect();
    let (quotient_cone_min_singular_value, quotient_cone_threshold) = if complex_report.passed
        && quotient_chain_condition.passed
        && boundary_preserved.passed
    {
        let cone = mapping_cone(&a, &src, &quotient, tol.max(quotient_chain_condition.threshold))?;
        let op = cone.laplace_type_operator();
        let (_, smin) = hermitian_is_invertible(&op, tol)?;
        let largest = crate::spectral::singular_values(&op).first().copied().unwrap_or(0.0);
        (smin, threshold(tol, largest))
    } else {
        (0.0, f64::INFINITY)
    };
    let passed = complex_report.passed
        && boundary_preserved.passed
        && self_adjoint.passed
        && quotient_chain_condition.passed
        && quotient_cone_min_singular_value > quotient_cone_threshold;
    Ok(BoundaryConditionsReport {
        complex: complex_report,
        boundary_preserved,
        self_adjoint,
        quotient_chain_condition,
        restricted_to_boundary,
        quotient_cone_min_singular_value,
        quotient_cone_threshold,
        passed,
    })
}

/// The boundary complex `(E₀, √−1·b₀, S₀)` together with the residuals of
/// its two constructions.
#[derive(Clone, Debug)]
pub struct BoundaryComplex {
    pub hp: HilbertPoincareComplex,
    /// `S₀` from the restriction of `bS + Sb*`, as a total operator on `E₀`.
    pub s0: CMatrix,
    /// `‖S₀(restriction) − S₀(closed form)‖`.
    pub formula_residual: f64,
    /// `‖b₀S₀ − S₀b₀*‖`.
    pub commutation_residual: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundaryComplexSummary {
    pub top_degree: usize,
    pub dims: Vec<usize>,
    pub formula_residual: f64,
    pub commutation_residual: f64,
    pub threshold: f64,
}

impl BoundaryComplex {
    pub fn summary(&self) -> BoundaryComplexSummary {
        BoundaryComplexSummary {
            top_degree: self.hp.top_degree(),
            dims: self.hp.dims().to_vec(),
            formula_residual: self.formula_residual,
            commutation_residual: self.commutation_residual,
            threshold: self.threshold,
        }
    }
}

/// Build `(E₀, √−1·b₀, S₀)`. `S₀` is computed both as the restriction of
/// `bS + Sb*` and by the closed form; the two must agree and the result must
/// be a nondegenerate Hilbert–Poincaré complex of top degree `m − 1`.
pub fn boundary_complex(cwb: &ComplexWithBoundary, tol: f64) -> Result<BoundaryComplex> {
    let d = decompose(cwb, tol)?;
    let m = cwb.top_degree();
    let s0 = d.s0_restriction();
    let closed = d.s0_closed_form();
    let scale = norm(&d.total_b()) * norm(&d.total_s());
    let thr = threshold(tol, scale);
    let formula_residual = norm(&(&s0 - &closed));
    if formula_residual > thr {
        return Err(Error::FormulaMismatch {
            residual: formula_residual,
        });
    }
    let commutation_residual = norm(&(&d.b0 * &s0 - &s0 * d.b0.adjoint()));

    let dims0: Vec<usize> = cwb.boundary_dims()[..m].to_vec();
    let g0 = Grading::new(&dims0);
    let ib0 = d.b0.map(|z| z * I);
    let complex = ChainComplex::new(dims0.clone(), (1..m).map(|k| g0.block(&ib0, &g0, k - 1, k)).collect())?;
    let duality = DualityOperator::from_total(&dims0, &s0);
    let hp = HilbertPoincareComplex::new(complex, duality, None)?;

    let report = verify_duality(&hp, tol)?;
    if !report.passed {
        return Err(match report.failure() {
            Some(Error::DegenerateDuality { min_singular_value }) => Error::DegenerateBoundaryDuality(format!(
                "B_S of the boundary complex has smallest singular value {min_singular_value:.3e}"
            )),
            _ => Error::IdentityViolated {
                identity: "b0 S0 - S0 b0* = 0",
                residual: commutation_residual,
            },
        });
    }
    Ok(BoundaryComplex {
        hp,
        s0,
        formula_residual,
        commutation_residual,
        threshold: thr,
    })
}

/// The cylinder `C ⊗ Δ¹` of top degree `n + 1` with boundary `C ⊔ C`.
///
/// Degree `k` is ordered `[C_k ⊗ [0], C_k ⊗ [1], C_{k−1} ⊗ [01]]`, with
/// `b(x ⊗ e) = bx ⊗ e + (−1)^{|x|}(x ⊗ [1] − x ⊗ [0])` and
/// `S = ½((P₀ + P₁) S_C P_e* + P_e S_C (P₀ + P₁)*)`. The first two summands
/// form `E₀`. Any action on `C` is dropped.
pub fn cylinder(c: &HilbertPoincareComplex) -> Result<ComplexWithBoundary> {
    let n = c.top_degree();
    let gc = c.grading();
    let dims: Vec<usize> = (0..=n + 1)
        .map(|k| 2 * gc.dim(k as isize) + gc.dim(k as isize - 1))
        .collect();
    let gw = Grading::new(&dims);
    let (nc, nw) = (gc.total(), gw.total());
    let mut p0 = zeros(nw, nc);
    let mut p1 = zeros(nw, nc);
    let mut pe = zeros(nw, nc);
    let mut phi = zeros(nc, nc);
    for k in 0..=n {
        let d = gc.dim(k as isize);
        let src = gc.range(k).start;
        let start = gw.range(k).start;
        let edge = gw.range(k + 1).start + 2 * gc.dim(k as isize + 1);
        let sign = if k % 2 == 0 { ONE } else { -ONE };
        for i in 0..d {
            p0[(start + i, src + i)] = ONE;
            p1[(start + d + i, src + i)] = ONE;
            pe[(edge + i, src + i)] = ONE;
            phi[(src + i, src + i)] = sign;
        }
    }
    let bc = c.total_b();
    let sc = c.total_s();
    let b = &p0 * &bc * p0.transpose()
        + &p1 * &bc * p1.transpose()
        + &pe * &bc * pe.transpose()
        + (&p1 - &p0) * &phi * pe.transpose();
    let ends = &p0 + &p1;
    let s = (&ends * &sc * pe.transpose() + &pe * &sc * ends.transpose()).map(|z| z * 0.5);
    let complex = ChainComplex::new(dims.clone(), (1..=n + 1).map(|k| gw.block(&b, &gw, k - 1, k)).collect())?;
    let duality = DualityOperator::from_total(&dims, &s);
    let boundary = (0..=n + 1).map(|k| (0..2 * gc.dim(k as isize)).collect()).collect();
    ComplexWithBoundary::new(complex, duality, boundary)
}

/// The hyperbolic complex on `E₁ ⊕ E₁` with differential
/// `δ = √−1·[[b₁, S₁], [0, b₁*]]` and swap duality `T`.
///
/// `b1` has top degree `m` and `S₁_k: E₁_{m−k} → E₁_k`. The result has top
/// degree `m + 1`: the first copy keeps its degrees, the second copy puts
/// `E₁_q` in degree `m + 1 − q`.
pub fn hyperbolic(b1: &ChainComplex, s1: &[CMatrix], tol: f64) -> Result<HilbertPoincareComplex> {
    let m = b1.top_degree();
    let s1 = DualityOperator::new(b1.dims(), s1.to_vec())?;
    let complex_report = verify_complex(b1, tol);
    if !complex_report.passed {
        return Err(Error::PreconditionViolated(format!(
            "b1 squared is nonzero (residual {:.3e})",
            complex_report.worst().map_or(0.0, |r| r.residual)
        )));
    }
    let g1 = b1.grading();
    let b = b1.total_differential();
    let s = s1.total(&g1);
    let chain = norm(&(&b * &s + &s * b.adjoint()));
    if chain > threshold(tol, norm(&b) * norm(&s)) {
        return Err(Error::PreconditionViolated(format!(
            "b1 S1 + S1 b1* is nonzero (residual {chain:.3e})"
        )));
    }

    let dims: Vec<usize> = (0..=m + 1)
        .map(|d| g1.dim(d as isize) + g1.dim(m as isize + 1 - d as isize))
        .collect();
    let out = Grading::new(&dims);
    let n1 = g1.total();
    // position of (copy, coordinate) in the output
    let mut pos = vec![0usize; 2 * n1];
    for d in 0..=m + 1 {
        let mut next = out.range(d).start;
        if d <= m {
            for x in g1.range(d) {
                pos[x] = next;
                next += 1;
            }
        }
        if d >= 1 {
            for x in g1.range(m + 1 - d) {
                pos[n1 + x] = next;
                next += 1;
            }
        }
    }
    let mut p = zeros(2 * n1, 2 * n1);
    for (x, &y) in pos.iter().enumerate() {
        p[(y, x)] = ONE;
    }
    let mut delta = zeros(2 * n1, 2 * n1);
    delta.view_mut((0, 0), (n1, n1)).copy_from(&b);
    delta.view_mut((0, n1), (n1, n1)).copy_from(&s);
    delta.view_mut((n1, n1), (n1, n1)).copy_from(&b.adjoint());
    let delta = (&p * delta * p.transpose()).map(|z| z * I);
    let mut t = zeros(2 * n1, 2 * n1);
    t.view_mut((0, n1), (n1, n1)).copy_from(&identity(n1));
    t.view_mut((n1, 0), (n1, n1)).copy_from(&identity(n1));
    let t = &p * t * p.transpose();

    let complex = ChainComplex::new(dims.clone(), (1..=m + 1).map(|k| out.block(&delta, &out, k - 1, k)).collect())?;
    let duality = DualityOperator::from_total(&dims, &t);
    HilbertPoincareComplex::new(complex, duality, None)
}

/// Residuals of the identities used in the proof that boundaries have zero
/// signature.
#[derive(Clone, Debug, Serialize)]
pub struct ConeIdentitiesReport {
    /// `H = [[b, Sj*], [0, b₁*]]` on `E ⊕ E₁` squares to zero.
    pub h_squared: IdentityResidual,
    /// `J∘I = 0` and `I*∘J = 0`.
    pub sequence_composition: IdentityResidual,
    /// `rank I + rank J = dim(E ⊕ E₁)` and `rank J + rank I* = dim(E₁ ⊕ E)`,
    /// with `I` injective and `I*` surjective.
    pub exactness_rank_defect: usize,
    /// `fδ = −b₀f` with `f = (h F)`, `δ = [[b₁, S₁], [0, b₁*]]`.
    pub chain_map: IdentityResidual,
    /// `S₀ = fTf* + b₀S₂ + S₂b₀*`.
    pub sign0: IdentityResidual,
    pub passed: bool,
}

impl ConeIdentitiesReport {
    pub fn failed_identity(&self) -> Option<&'static str> {
        if self.exactness_rank_defect != 0 {
            return Some("exactness of the four-term sequence");
        }
        [&self.h_squared, &self.sequence_composition, &self.chain_map, &self.sign0]
            .into_iter()
            .find(|r| !r.passed)
            .map(|r| r.identity)
    }
}

pub fn verify_cone_identities(cwb: &ComplexWithBoundary, tol: f64) -> Result<ConeIdentitiesReport> {
    let d = decompose(cwb, tol)?;
    let (n0, n1) = (d.boundary.total(), d.interior.total());
    let n = n0 + n1;
    let b = d.total_b();
    let s = d.total_s();
    let scale_bs = norm(&b) * norm(&s);

    let mut j = zeros(n1, n);
    j.view_mut((0, n0), (n1, n1)).copy_from(&identity(n1));
    let mut inc = zeros(n, n0);
    inc.view_mut((0, 0), (n0, n0)).copy_from(&identity(n0));

    let mut h = zeros(n + n1, n + n1);
    h.view_mut((0, 0), (n, n)).copy_from(&b);
    h.view_mut((0, n), (n, n1)).copy_from(&(&s * j.adjoint()));
    h.view_mut((n, n), (n1, n1)).copy_from(&d.b1.adjoint());
    let h_squared = IdentityResidual::new(
        "H^2 = 0",
        norm(&(&h * &h)),
        threshold(tol, norm(&h) * norm(&h)),
    );

    // 0 → E₀ →I→ E ⊕ E₁ →J→ E₁ ⊕ E →I*→ E₀ → 0
    let mut big_i = zeros(n + n1, n0);
    big_i.view_mut((0, 0), (n, n0)).copy_from(&inc);
    let mut big_j = zeros(n1 + n, n + n1);
    big_j.view_mut((0, 0), (n1, n)).copy_from(&j);
    big_j.view_mut((n1, n), (n, n1)).copy_from(&j.adjoint());
    let mut big_i_star = zeros(n0, n1 + n);
    big_i_star.view_mut((0, n1), (n0, n)).copy_from(&inc.adjoint());
    let composition = norm(&(&big_j * &big_i)) + norm(&(&big_i_star * &big_j));
    let sequence_composition = IdentityResidual::new("J I = 0, I* J = 0", composition, tol);
    let (ri, rj, ris) = (rank(&big_i, tol), rank(&big_j, tol), rank(&big_i_star, tol));
    let exactness_rank_defect = (n0 - ri) + (n + n1).abs_diff(ri + rj) + (n1 + n).abs_diff(rj + ris) + (n0 - ris);

    let mut f = zeros(n0, 2 * n1);
    f.view_mut((0, 0), (n0, n1)).copy_from(&d.h);
    f.view_mut((0, n1), (n0, n1)).copy_from(&d.f);
    let mut delta = zeros(2 * n1, 2 * n1);
    delta.view_mut((0, 0), (n1, n1)).copy_from(&d.b1);
    delta.view_mut((0, n1), (n1, n1)).copy_from(&d.s1);
    delta.view_mut((n1, n1), (n1, n1)).copy_from(&d.b1.adjoint());
    let chain_map = IdentityResidual::new(
        "f delta = -b0 f",
        norm(&(&f * &delta + &d.b0 * &f)),
        threshold(tol, norm(&f) * (norm(&delta) + norm(&d.b0))),
    );

    let mut t = zeros(2 * n1, 2 * n1);
    t.view_mut((0, n1), (n1, n1)).copy_from(&identity(n1));
    t.view_mut((n1, 0), (n1, n1)).copy_from(&identity(n1));
    let rhs = &f * &t * f.adjoint() + &d.b0 * &d.s2 + &d.s2 * d.b0.adjoint();
    let sign0 = IdentityResidual::new(
        "S0 = f T f* + b0 S2 + S2 b0*",
        norm(&(d.s0_restriction() - rhs)),
        threshold(tol, scale_bs),
    );

    let passed = h_squared.passed
        && sequence_composition.passed
        && exactness_rank_defect == 0
        && chain_map.passed
        && sign0.passed;
    Ok(ConeIdentitiesReport {
        h_squared,
        sequence_composition,
        exactness_rank_defect,
        chain_map,
        sign0,
        passed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundarySignatureReport {
    pub boundary: BoundaryComplexSummary,
    pub signatures: CoincidenceReport,
    pub zero: bool,
    pub passed: bool,
}

/// All three signatures of the boundary complex; passes iff they agree and
/// equal the zero class.
pub fn boundary_signature_is_zero(cwb: &ComplexWithBoundary, tol: f64) -> Result<BoundarySignatureReport> {
    let boundary = boundary_complex(cwb, tol)?;
    let signatures = check_coincidence(&boundary.hp, tol)?;
    let zero = signatures.results().iter().all(|r| r.k0.is_zero(CHARACTER_TOL));
    Ok(BoundarySignatureReport {
        boundary: boundary.summary(),
        passed: zero && signatures.agree,
        zero,
        signatures,
    })
}
