//! Graded chain complexes, duality operators, mapping cones and
//! Hilbert–Poincaré complexes.
//!
//! Degrees run `0..=n`. The differential `b_k` maps degree `k` to `k − 1`;
//! the duality block `S_k` maps degree `n − k` to degree `k`. Total
//! operators act on `E = E_0 ⊕ … ⊕ E_n` in that order.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ktheory::{ActionReport, GroupAction};
use crate::spectral::{
    block_diag, hermitian_is_invertible, is_finite, norm, rank, threshold, unitary_residual, zeros, CMatrix,
};

/// Dimensions of a graded space with cached block offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl Grading {
    pub fn new(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &d in dims {
            acc += d;
            offsets.push(acc);
        }
        Grading {
            dims: dims.to_vec(),
            offsets,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension of degree `k`; zero outside `0..=n`.
    pub fn dim(&self, k: isize) -> usize {
        if k < 0 {
            0
        } else {
            self.dims.get(k as usize).copied().unwrap_or(0)
        }
    }

    pub fn total(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn range(&self, k: usize) -> Range<usize> {
        self.offsets[k]..self.offsets[k + 1]
    }

    /// Copy the `(row_degree, col_degree)` block out of a total matrix.
    pub fn block(&self, m: &CMatrix, cols: &Grading, row_degree: usize, col_degree: usize) -> CMatrix {
        let r = self.range(row_degree);
        let c = cols.range(col_degree);
        m.view((r.start, c.start), (r.len(), c.len())).into_owned()
    }

    /// Write a block into a total matrix.
    pub fn set_block(&self, m: &mut CMatrix, cols: &Grading, row_degree: usize, col_degree: usize, block: &CMatrix) {
        let r = self.range(row_degree);
        let c = cols.range(col_degree);
        m.view_mut((r.start, c.start), (r.len(), c.len())).copy_from(block);
    }
}

/// A bounded chain complex `E_0 ← E_1 ← ⋯ ← E_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainComplex {
    dims: Vec<usize>,
    b: Vec<CMatrix>,
}

impl ChainComplex {
    /// `b[k - 1]` is the differential `b_k: E_k → E_{k−1}`.
    pub fn new(dims: Vec<usize>, b: Vec<CMatrix>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::ShapeMismatch("a complex needs at least degree 0".into()));
        }
        if b.len() != dims.len() - 1 {
            return Err(Error::ShapeMismatch(format!(
                "{} differentials for top degree {}",
                b.len(),
                dims.len() - 1
            )));
        }
        for (i, m) in b.iter().enumerate() {
            let k = i + 1;
            if m.shape() != (dims[k - 1], dims[k]) {
                return Err(Error::ShapeMismatch(format!(
                    "b_{k} is {}x{}, expected {}x{}",
                    m.nrows(),
                    m.ncols(),
                    dims[k - 1],
                    dims[k]
                )));
            }
            if !is_finite(m) {
                return Err(Error::NonFinite);
            }
        }
        Ok(ChainComplex { dims, b })
    }

    /// The complex with the given dimensions and zero differentials.
    pub fn zero(dims: Vec<usize>) -> Result<Self> {
        let b = (1..dims.len()).map(|k| zeros(dims[k - 1], dims[k])).collect();
        Self::new(dims, b)
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn grading(&self) -> Grading {
        Grading::new(&self.dims)
    }

    /// `b_k` for `1 ≤ k ≤ n`.
    pub fn differential(&self, k: usize) -> &CMatrix {
        &self.b[k - 1]
    }

    pub fn differentials(&self) -> &[CMatrix] {
        &self.b
    }

    /// `b` as a single operator on the total space.
    pub fn total_differential(&self) -> CMatrix {
        let g = self.grading();
        let mut out = zeros(g.total(), g.total());
        for k in 1..=self.top_degree() {
            g.set_block(&mut out, &g, k - 1, k, &self.b[k - 1]);
        }
        out
    }

    /// Betti numbers `dim E_k − rank b_k − rank b_{k+1}`.
    pub fn homology_ranks(&self, tol: f64) -> Vec<usize> {
        let n = self.top_degree();
        let ranks: Vec<usize> = self.b.iter().map(|m| rank(m, tol)).collect();
        (0..=n)
            .map(|k| {
                let out = if k >= 1 { ranks[k - 1] } else { 0 };
                let inc = if k < n { ranks[k] } else { 0 };
                self.dims[k].saturating_sub(out + inc)
            })
            .collect()
    }
}

/// One residual attached to a degree.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeResidual {
    pub degree: usize,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl DegreeResidual {
    fn new(degree: usize, residual: f64, threshold: f64) -> Self {
        DegreeResidual {
            degree,
            residual,
            threshold,
            passed: residual <= threshold,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexReport {
    /// `‖b_{k} b_{k+1}‖` labelled by `k`.
    pub residuals: Vec<DegreeResidual>,
    pub passed: bool,
}

impl ComplexReport {
    pub fn worst(&self) -> Option<&DegreeResidual> {
        self.residuals.iter().max_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

/// Check `b_k b_{k+1} = 0` in every degree.
pub fn verify_complex(c: &ChainComplex, tol: f64) -> ComplexReport {
    let n = c.top_degree();
    let residuals: Vec<DegreeResidual> = (1..n)
        .map(|k| {
            let (bk, bk1) = (c.differential(k), c.differential(k + 1));
            let r = norm(&(bk * bk1));
            DegreeResidual::new(k, r, threshold(tol, norm(bk) * norm(bk1)))
        })
        .collect();
    let passed = residuals.iter().all(|r| r.passed);
    ComplexReport { residuals, passed }
}

/// The dual complex `(E, b*)` re-indexed so that degree `p` is `E_{n−p}`
/// with differential `b*_{n−p+1}`.
pub fn dual_complex(c: &ChainComplex) -> ChainComplex {
    let n = c.top_degree();
    let dims: Vec<usize> = (0..=n).map(|p| c.dims[n - p]).collect();
    let b = (1..=n).map(|p| c.differential(n - p + 1).adjoint()).collect();
    ChainComplex { dims, b }
}

fn negated(c: &ChainComplex) -> ChainComplex {
    ChainComplex {
        dims: c.dims.clone(),
        b: c.b.iter().map(|m| -m).collect(),
    }
}

/// Summand order inside each cone degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConeOrder {
    /// `E''_j = E'_{j−1} ⊕ E_j`.
    SourceFirst,
    /// `E''_j = E_j ⊕ E'_{j−1}`.
    TargetFirst,
}

/// Mapping cone of a chain map together with the position of every summand.
#[derive(Clone, Debug)]
pub struct MappingCone {
    pub complex: ChainComplex,
    src: Grading,
    dst: Grading,
    order: ConeOrder,
}

impl MappingCone {
    pub fn order(&self) -> ConeOrder {
        self.order
    }

    fn degree_offset(&self, j: usize) -> usize {
        self.complex.grading().range(j).start
    }

    /// Coordinates of `E'_j` (sitting in cone degree `j + 1`) in the total space.
    pub fn source_range(&self, j: usize) -> Range<usize> {
        let start = self.degree_offset(j + 1)
            + match self.order {
                ConeOrder::SourceFirst => 0,
                ConeOrder::TargetFirst => self.dst.dim(j as isize + 1),
            };
        start..start + self.src.dim(j as isize)
    }

    /// Coordinates of `E_j` (sitting in cone degree `j`) in the total space.
    pub fn target_range(&self, j: usize) -> Range<usize> {
        let start = self.degree_offset(j)
            + match self.order {
                ConeOrder::SourceFirst => self.src.dim(j as isize - 1),
                ConeOrder::TargetFirst => 0,
            };
        start..start + self.dst.dim(j as isize)
    }

    /// `b'' + b''*` on the total space of the cone.
    pub fn laplace_type_operator(&self) -> CMatrix {
        let d = self.complex.total_differential();
        &d + d.adjoint()
    }
}

fn assemble_cone(a: &[CMatrix], src: &ChainComplex, dst: &ChainComplex, order: ConeOrder) -> MappingCone {
    let n = dst.top_degree();
    let sg = src.grading();
    let dg = dst.grading();
    let dims: Vec<usize> = (0..=n + 1)
        .map(|j| sg.dim(j as isize - 1) + dg.dim(j as isize))
        .collect();
    let mut cone = MappingCone {
        complex: ChainComplex::zero(dims).expect("cone dimensions are consistent"),
        src: sg,
        dst: dg,
        order,
    };
    let total_dim = cone.complex.grading().total();
    let mut total = zeros(total_dim, total_dim);
    let mut put = |rows: Range<usize>, cols: Range<usize>, m: &CMatrix| {
        total.view_mut((rows.start, cols.start), (rows.len(), cols.len())).copy_from(m);
    };
    for j in 1..=n {
        // −b'_j : E'_j → E'_{j−1}
        put(cone.source_range(j - 1), cone.source_range(j), &-src.differential(j));
        put(cone.target_range(j - 1), cone.target_range(j), dst.differential(j));
    }
    for (j, aj) in a.iter().enumerate() {
        put(cone.target_range(j), cone.source_range(j), aj);
    }
    let g = cone.complex.grading();
    let b = (1..=n + 1).map(|j| g.block(&total, &g, j - 1, j)).collect();
    cone.complex.b = b;
    cone
}

fn check_chain_map_shapes(a: &[CMatrix], src: &ChainComplex, dst: &ChainComplex) -> Result<()> {
    if src.top_degree() != dst.top_degree() {
        return Err(Error::DimensionMismatch(format!(
            "source has top degree {}, target {}",
            src.top_degree(),
            dst.top_degree()
        )));
    }
    if a.len() != dst.dims.len() {
        return Err(Error::ShapeMismatch(format!(
            "chain map has {} components, expected {}",
            a.len(),
            dst.dims.len()
        )));
    }
    for (j, aj) in a.iter().enumerate() {
        if aj.shape() != (dst.dims[j], src.dims[j]) {
            return Err(Error::ShapeMismatch(format!(
                "chain map component {j} is {}x{}, expected {}x{}",
                aj.nrows(),
                aj.ncols(),
                dst.dims[j],
                src.dims[j]
            )));
        }
    }
    Ok(())
}

/// `max_j ‖a_{j−1} b'_j − b_j a_j‖` with the degree attaining it.
fn chain_map_defect(a: &[CMatrix], src: &ChainComplex, dst: &ChainComplex, tol: f64) -> Option<(usize, f64)> {
    (1..=dst.top_degree())
        .map(|j| {
            let lhs = &a[j - 1] * src.differential(j);
            let rhs = dst.differential(j) * &a[j];
            let scale = norm(&a[j - 1]) * norm(src.differential(j)) + norm(dst.differential(j)) * norm(&a[j]);
            (j, norm(&(lhs - rhs)), threshold(tol, scale))
        })
        .find(|&(_, r, thr)| r > thr)
        .map(|(j, r, _)| (j, r))
}

/// Mapping cone of a chain map `a: src → dst`, summands ordered `E'_{j−1} ⊕ E_j`.
pub fn mapping_cone(a: &[CMatrix], src: &ChainComplex, dst: &ChainComplex, tol: f64) -> Result<MappingCone> {
    mapping_cone_ordered(a, src, dst, ConeOrder::SourceFirst, tol)
}

/// Mapping cone with the interchanged summand order `E_j ⊕ E'_{j−1}`.
pub fn mapping_cone_interchanged(
    a: &[CMatrix],
    src: &ChainComplex,
    dst: &ChainComplex,
    tol: f64,
) -> Result<MappingCone> {
    mapping_cone_ordered(a, src, dst, ConeOrder::TargetFirst, tol)
}

fn mapping_cone_ordered(
    a: &[CMatrix],
    src: &ChainComplex,
    dst: &ChainComplex,
    order: ConeOrder,
    tol: f64,
) -> Result<MappingCone> {
    check_chain_map_shapes(a, src, dst)?;
    if let Some((degree, residual)) = chain_map_defect(a, src, dst, tol) {
        return Err(Error::NotChainMap { degree, residual });
    }
    Ok(assemble_cone(a, src, dst, order))
}

/// Duality blocks `S_k: E_{n−k} → E_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityOperator {
    blocks: Vec<CMatrix>,
}

impl DualityOperator {
    pub fn new(dims: &[usize], blocks: Vec<CMatrix>) -> Result<Self> {
        let n = dims.len().saturating_sub(1);
        if blocks.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} duality blocks for {} degrees",
                blocks.len(),
                dims.len()
            )));
        }
        for (k, s) in blocks.iter().enumerate() {
            if s.shape() != (dims[k], dims[n - k]) {
                return Err(Error::ShapeMismatch(format!(
                    "S_{k} is {}x{}, expected {}x{}",
                    s.nrows(),
                    s.ncols(),
                    dims[k],
                    dims[n - k]
                )));
            }
            if !is_finite(s) {
                return Err(Error::NonFinite);
            }
        }
        Ok(DualityOperator { blocks })
    }

    pub fn zero(dims: &[usize]) -> Self {
        let n = dims.len().saturating_sub(1);
        DualityOperator {
            blocks: (0..dims.len()).map(|k| zeros(dims[k], dims[n - k])).collect(),
        }
    }

    /// Read the blocks `(k, n−k)` of a total operator.
    pub fn from_total(dims: &[usize], s: &CMatrix) -> Self {
        let g = Grading::new(dims);
        let n = dims.len() - 1;
        DualityOperator {
            blocks: (0..=n).map(|k| g.block(s, &g, k, n - k)).collect(),
        }
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn total(&self, grading: &Grading) -> CMatrix {
        let n = self.blocks.len() - 1;
        let mut out = zeros(grading.total(), grading.total());
        for (k, s) in self.blocks.iter().enumerate() {
            grading.set_block(&mut out, grading, k, n - k, s);
        }
        out
    }
}

/// An algebraic Hilbert–Poincaré complex `(E, b, S)`, optionally with a
/// unitary group action.
#[derive(Clone, Debug)]
pub struct HilbertPoincareComplex {
    complex: ChainComplex,
    duality: DualityOperator,
    action: Option<GroupAction>,
}

impl HilbertPoincareComplex {
    /// Assemble a triple after checking shapes. Validity is checked by
    /// [`verify_duality`].
    pub fn new(complex: ChainComplex, duality: DualityOperator, action: Option<GroupAction>) -> Result<Self> {
        let dims = complex.dims();
        let n = complex.top_degree();
        if duality.blocks.len() != dims.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} duality blocks for top degree {n}",
                duality.blocks.len()
            )));
        }
        for (k, s) in duality.blocks.iter().enumerate() {
            if s.shape() != (dims[k], dims[n - k]) {
                return Err(Error::ShapeMismatch(format!(
                    "S_{k} is {}x{}, expected {}x{}",
                    s.nrows(),
                    s.ncols(),
                    dims[k],
                    dims[n - k]
                )));
            }
        }
        if let Some(action) = &action {
            GroupAction::new(action.group().clone(), action.matrices().to_vec(), dims)?;
        }
        Ok(HilbertPoincareComplex {
            complex,
            duality,
            action,
        })
    }

    /// The zero complex of top degree `n`.
    pub fn zero(n: usize) -> Self {
        let dims = vec![0; n + 1];
        HilbertPoincareComplex {
            complex: ChainComplex::zero(dims.clone()).unwrap(),
            duality: DualityOperator::zero(&dims),
            action: None,
        }
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.complex
    }

    pub fn duality(&self) -> &DualityOperator {
        &self.duality
    }

    pub fn action(&self) -> Option<&GroupAction> {
        self.action.as_ref()
    }

    pub fn top_degree(&self) -> usize {
        self.complex.top_degree()
    }

    pub fn dims(&self) -> &[usize] {
        self.complex.dims()
    }

    pub fn grading(&self) -> Grading {
        self.complex.grading()
    }

    pub fn total_b(&self) -> CMatrix {
        self.complex.total_differential()
    }

    pub fn total_s(&self) -> CMatrix {
        self.duality.total(&self.grading())
    }

    pub fn with_action(mut self, action: Option<GroupAction>) -> Result<Self> {
        if let Some(a) = &action {
            GroupAction::new(a.group().clone(), a.matrices().to_vec(), self.dims())?;
        }
        self.action = action;
        Ok(self)
    }
}

/// The cone of `S` viewed as a chain map `(E, −b*) → (E, b)`; no validity
/// checks.
pub fn duality_cone(hp: &HilbertPoincareComplex, order: ConeOrder) -> MappingCone {
    let src = negated(&dual_complex(&hp.complex));
    assemble_cone(hp.duality.blocks(), &src, &hp.complex, order)
}

/// Cone of `S` after checking the chain condition.
pub fn cone_of_duality(hp: &HilbertPoincareComplex, tol: f64) -> Result<MappingCone> {
    let src = negated(&dual_complex(&hp.complex));
    mapping_cone(hp.duality.blocks(), &src, &hp.complex, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    pub action: ActionReport,
    /// `max ‖ρ(g)b − bρ(g)‖` over elements and degrees.
    pub differential_residual: f64,
    /// `max ‖ρ(g)S − Sρ(g)‖` over elements and degrees.
    pub duality_residual: f64,
    pub threshold: f64,
    pub worst_element: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualityReport {
    pub complex: ComplexReport,
    pub self_adjoint_residual: f64,
    pub self_adjoint_threshold: f64,
    /// `‖b_k S_k + S_{k−1} b*_{n−k+1}‖` labelled by `k`.
    pub chain_residuals: Vec<DegreeResidual>,
    /// Smallest singular value of `B_S` on the cone of `S`.
    pub cone_min_singular_value: f64,
    pub cone_threshold: f64,
    pub cone_invertible: bool,
    pub equivariance: Option<EquivarianceReport>,
    pub passed: bool,
}

impl DualityReport {
    /// The error describing the first failed condition, if any. Algebraic
    /// failures take precedence over degeneracy of `B_S`.
    pub fn failure(&self) -> Option<Error> {
        if let Some(r) = self.complex.residuals.iter().find(|r| !r.passed) {
            return Some(Error::NotChainMap {
                degree: r.degree,
                residual: r.residual,
            });
        }
        if self.self_adjoint_residual > self.self_adjoint_threshold {
            return Some(Error::NotSelfAdjoint {
                residual: self.self_adjoint_residual,
                threshold: self.self_adjoint_threshold,
            });
        }
        if let Some(r) = self.chain_residuals.iter().find(|r| !r.passed) {
            return Some(Error::IdentityViolated {
                identity: "bS + Sb* = 0",
                residual: r.residual,
            });
        }
        if let Some(eq) = self.equivariance.as_ref().filter(|e| !e.passed) {
            if !eq.action.passed {
                return Some(Error::InvalidAction("action is not a unitary representation".into()));
            }
            return Some(Error::EquivarianceViolated {
                element: eq.worst_element,
                degree: 0,
                residual: eq.differential_residual.max(eq.duality_residual),
            });
        }
        if !self.cone_invertible {
            return Some(Error::DegenerateDuality {
                min_singular_value: self.cone_min_singular_value,
            });
        }
        None
    }
}

fn equivariance_report(hp: &HilbertPoincareComplex, action: &GroupAction, tol: f64) -> EquivarianceReport {
    let n = hp.top_degree();
    let mut diff: f64 = 0.0;
    let mut dual: f64 = 0.0;
    let mut worst = (0, 0.0_f64);
    let scale = norm(&hp.total_b()).max(norm(&hp.total_s()));
    for g in 0..action.group().order() {
        let mut here: f64 = 0.0;
        for k in 1..=n {
            let b = hp.complex.differential(k);
            let r = norm(&(action.matrix(g, k - 1) * b - b * action.matrix(g, k)));
            diff = diff.max(r);
            here = here.max(r);
        }
        for k in 0..=n {
            let s = hp.duality.block(k);
            let r = norm(&(action.matrix(g, k) * s - s * action.matrix(g, n - k)));
            dual = dual.max(r);
            here = here.max(r);
        }
        if here > worst.1 {
            worst = (g, here);
        }
    }
    let action_report = action.verify(tol);
    let thr = threshold(tol, scale);
    EquivarianceReport {
        passed: action_report.passed && diff <= thr && dual <= thr,
        action: action_report,
        differential_residual: diff,
        duality_residual: dual,
        threshold: thr,
        worst_element: worst.0,
    }
}

/// Check the Hilbert–Poincaré conditions: `b² = 0`, `S = S*`,
/// `bS + Sb* = 0`, invertibility of `B_S` on the cone of `S`, and
/// equivariance when an action is present.
pub fn verify_duality(hp: &HilbertPoincareComplex, tol: f64) -> Result<DualityReport> {
    let n = hp.top_degree();
    let complex = verify_complex(&hp.complex, tol);
    let s = hp.total_s();
    let self_adjoint_residual = norm(&(&s - s.adjoint()));
    let self_adjoint_threshold = threshold(tol, norm(&s));
    let chain_residuals = (1..=n)
        .map(|k| {
            let b = hp.complex.differential(k);
            let bs = b * hp.duality.block(k);
            let sb = hp.duality.block(k - 1) * hp.complex.differential(n - k + 1).adjoint();
            let scale = norm(b) * norm(hp.duality.block(k))
                + norm(hp.duality.block(k - 1)) * norm(hp.complex.differential(n - k + 1));
            DegreeResidual::new(k, norm(&(bs + sb)), threshold(tol, scale))
        })
        .collect::<Vec<_>>();
    let cone = duality_cone(hp, ConeOrder::SourceFirst);
    let (cone_invertible, cone_min_singular_value) = hermitian_is_invertible(&cone.laplace_type_operator(), tol)?;
    let cone_threshold = threshold(tol, norm(&cone.laplace_type_operator()));
    let equivariance = hp.action.as_ref().map(|a| equivariance_report(hp, a, tol));
    let passed = complex.passed
        && self_adjoint_residual <= self_adjoint_threshold
        && chain_residuals.iter().all(|r| r.passed)
        && cone_invertible
        && equivariance.as_ref().is_none_or(|e| e.passed);
    Ok(DualityReport {
        complex,
        self_adjoint_residual,
        self_adjoint_threshold,
        chain_residuals,
        cone_min_singular_value,
        cone_threshold,
        cone_invertible,
        equivariance,
        passed,
    })
}

/// Conjugate by a degreewise unitary: `b_k ↦ u_{k−1} b_k u_k*`,
/// `S_k ↦ u_k S_k u_{n−k}*`, `ρ ↦ uρu*`.
pub fn twist(hp: &HilbertPoincareComplex, u: &[CMatrix], tol: f64) -> Result<HilbertPoincareComplex> {
    let dims = hp.dims();
    let n = hp.top_degree();
    if u.len() != dims.len() {
        return Err(Error::ShapeMismatch(format!("{} unitaries for {} degrees", u.len(), dims.len())));
    }
    for (k, uk) in u.iter().enumerate() {
        if uk.shape() != (dims[k], dims[k]) {
            return Err(Error::ShapeMismatch(format!(
                "unitary in degree {k} is {}x{}, expected {}x{}",
                uk.nrows(),
                uk.ncols(),
                dims[k],
                dims[k]
            )));
        }
        let residual = unitary_residual(uk);
        if residual > threshold(tol, (dims[k] as f64).sqrt()) {
            return Err(Error::NotUnitary { degree: k, residual });
        }
    }
    let b = (1..=n)
        .map(|k| &u[k - 1] * hp.complex.differential(k) * u[k].adjoint())
        .collect();
    let s = (0..=n)
        .map(|k| &u[k] * hp.duality.block(k) * u[n - k].adjoint())
        .collect();
    let action = hp.action.as_ref().map(|a| {
        let matrices = a
            .matrices()
            .iter()
            .map(|per| per.iter().zip(u).map(|(r, uk)| uk * r * uk.adjoint()).collect())
            .collect();
        GroupAction::from_parts(a.group().clone(), matrices)
    });
    Ok(HilbertPoincareComplex {
        complex: ChainComplex::new(dims.to_vec(), b)?,
        duality: DualityOperator::new(dims, s)?,
        action,
    })
}

/// `S ↦ S + bRb*` for a self-adjoint family `R_k: E_{n+2−k} → E_k`,
/// `k = 0..=n` (blocks with `n + 2 − k > n` are empty).
pub fn perturb_duality(hp: &HilbertPoincareComplex, r: &[CMatrix], tol: f64) -> Result<HilbertPoincareComplex> {
    let g = hp.grading();
    let n = hp.top_degree();
    if r.len() != n + 1 {
        return Err(Error::ShapeMismatch(format!("{} perturbation blocks for top degree {n}", r.len())));
    }
    for (k, rk) in r.iter().enumerate() {
        let expected = (g.dim(k as isize), g.dim(n as isize + 2 - k as isize));
        if rk.shape() != expected {
            return Err(Error::ShapeMismatch(format!(
                "R_{k} is {}x{}, expected {}x{}",
                rk.nrows(),
                rk.ncols(),
                expected.0,
                expected.1
            )));
        }
    }
    let mut asym: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 2..=n {
        asym = asym.max(norm(&(&r[k] - r[n + 2 - k].adjoint())));
        scale = scale.max(norm(&r[k]));
    }
    if asym > threshold(tol, scale) {
        return Err(Error::NotSelfAdjoint {
            residual: asym,
            threshold: threshold(tol, scale),
        });
    }
    let blocks = (0..=n)
        .map(|k| {
            let mut s = hp.duality.block(k).clone();
            if k < n && k >= 1 {
                s += hp.complex.differential(k + 1) * &r[k + 1] * hp.complex.differential(n - k + 1).adjoint();
            }
            s
        })
        .collect();
    Ok(HilbertPoincareComplex {
        complex: hp.complex.clone(),
        duality: DualityOperator::new(hp.dims(), blocks)?,
        action: hp.action.clone(),
    })
}

/// Degreewise direct sum; both summands must have the same top degree and
/// act through the same group (or both carry no action).
pub fn direct_sum(a: &HilbertPoincareComplex, b: &HilbertPoincareComplex) -> Result<HilbertPoincareComplex> {
    if a.top_degree() != b.top_degree() {
        return Err(Error::DimensionMismatch(format!(
            "direct sum of complexes of top degree {} and {}",
            a.top_degree(),
            b.top_degree()
        )));
    }
    let n = a.top_degree();
    let dims: Vec<usize> = a.dims().iter().zip(b.dims()).map(|(x, y)| x + y).collect();
    let diffs = (1..=n)
        .map(|k| block_diag(&[a.complex.differential(k), b.complex.differential(k)]))
        .collect();
    let blocks = (0..=n)
        .map(|k| block_diag(&[a.duality.block(k), b.duality.block(k)]))
        .collect();
    let action = match (&a.action, &b.action) {
        (None, None) => None,
        (Some(x), Some(y)) => {
            if x.group() != y.group() {
                return Err(Error::GroupMismatch);
            }
            let matrices = (0..x.group().order())
                .map(|g| (0..=n).map(|k| block_diag(&[x.matrix(g, k), y.matrix(g, k)])).collect())
                .collect();
            Some(GroupAction::from_parts(x.group().clone(), matrices))
        }
        _ => return Err(Error::GroupMismatch),
    };
    Ok(HilbertPoincareComplex {
        complex: ChainComplex::new(dims.clone(), diffs)?,
        duality: DualityOperator::new(&dims, blocks)?,
        action,
    })
}

/// Orientation reversal `S ↦ −S`.
pub fn opposite(hp: &HilbertPoincareComplex) -> HilbertPoincareComplex {
    HilbertPoincareComplex {
        complex: hp.complex.clone(),
        duality: DualityOperator {
            blocks: hp.duality.blocks.iter().map(|s| -s).collect(),
        },
        action: hp.action.clone(),
    }
}
