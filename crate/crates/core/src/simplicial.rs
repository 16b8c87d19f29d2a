//! Oriented triangulated manifolds, their simplicial chain complexes, the
//! cap-product duality and finite simplicial group actions.
//!
//! Vertex ids are totally ordered by their numeric value; every simplex is
//! stored as its sorted vertex tuple and the chain bases are orthonormal.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::bordism::{verify_boundary_conditions, ComplexWithBoundary};
use crate::error::{Error, Result};
use crate::hpcomplex::{verify_duality, ChainComplex, DualityOperator, DualityReport, HilbertPoincareComplex};
use crate::ktheory::{FiniteGroup, GroupAction, K0Class};
use crate::signature::{check_coincidence, CoincidenceReport};
use crate::spectral::{from_i64, norm, threshold, CMatrix};

pub type Simplex = Vec<u32>;

/// Sort in place and return the sign of the sorting permutation, or `None`
/// if two entries coincide.
pub fn sort_with_parity(v: &mut [u32]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Facet {
    pub verts: Simplex,
    pub sign: i64,
}

/// A finite oriented pseudomanifold: top simplices with orientation signs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedSimplicialManifold {
    dim: usize,
    vertices: Vec<u32>,
    facets: Vec<Facet>,
    with_boundary: bool,
}

impl OrientedSimplicialManifold {
    /// Facets may list their vertices in any order; they are sorted and the
    /// sign is multiplied by the parity of the sorting permutation.
    pub fn new(dim: usize, vertices: Vec<u32>, facets: Vec<(Vec<u32>, i64)>, with_boundary: bool) -> Result<Self> {
        let mut sorted_vertices = vertices.clone();
        if sort_with_parity(&mut sorted_vertices).is_none() {
            return Err(Error::InvalidFacet("vertex ids are not distinct".into()));
        }
        if facets.is_empty() {
            return Err(Error::InvalidFacet("no facets".into()));
        }
        let mut seen = BTreeSet::new();
        let mut canonical = Vec::with_capacity(facets.len());
        for (verts, sign) in facets {
            if verts.len() != dim + 1 {
                return Err(Error::InvalidFacet(format!(
                    "facet {verts:?} has {} vertices, expected {}",
                    verts.len(),
                    dim + 1
                )));
            }
            if sign != 1 && sign != -1 {
                return Err(Error::InvalidFacet(format!("facet {verts:?} has sign {sign}, expected ±1")));
            }
            if let Some(v) = verts.iter().find(|v| sorted_vertices.binary_search(v).is_err()) {
                return Err(Error::InvalidFacet(format!("facet {verts:?} uses unknown vertex {v}")));
            }
            let mut s = verts.clone();
            let parity = sort_with_parity(&mut s)
                .ok_or_else(|| Error::InvalidFacet(format!("facet {verts:?} repeats a vertex")))?;
            if !seen.insert(s.clone()) {
                return Err(Error::InvalidFacet(format!("facet {s:?} listed twice")));
            }
            canonical.push(Facet {
                verts: s,
                sign: sign * parity,
            });
        }
        if dim > 0 {
            let mut ridges: HashMap<Simplex, usize> = HashMap::new();
            for f in &canonical {
                for i in 0..=dim {
                    let mut r = f.verts.clone();
                    r.remove(i);
                    *ridges.entry(r).or_default() += 1;
                }
            }
            for (r, &c) in &ridges {
                if c > 2 || (!with_boundary && c != 2) {
                    return Err(Error::InvalidFacet(format!(
                        "codimension-one face {r:?} lies in {c} facets"
                    )));
                }
            }
        }
        Ok(OrientedSimplicialManifold {
            dim,
            vertices: sorted_vertices,
            facets: canonical,
            with_boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[u32] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn has_boundary(&self) -> bool {
        self.with_boundary
    }

    /// The same triangulation with every orientation sign flipped.
    pub fn opposite(&self) -> Self {
        let mut m = self.clone();
        for f in &mut m.facets {
            f.sign = -f.sign;
        }
        m
    }

    /// Codimension-one faces lying in exactly one facet.
    pub fn boundary_ridges(&self) -> Vec<Simplex> {
        if self.dim == 0 {
            return Vec::new();
        }
        let mut ridges: HashMap<Simplex, usize> = HashMap::new();
        for f in &self.facets {
            for i in 0..=self.dim {
                let mut r = f.verts.clone();
                r.remove(i);
                *ridges.entry(r).or_default() += 1;
            }
        }
        let mut out: Vec<Simplex> = ridges.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        out.sort();
        out
    }
}

fn faces_of_size(s: &[u32], size: usize) -> Vec<Simplex> {
    let n = s.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect());
        }
    }
    out
}

/// Simplices per degree and integer boundary matrices.
#[derive(Clone, Debug)]
pub struct SimplicialChainData {
    pub simplices: Vec<Vec<Simplex>>,
    index: Vec<HashMap<Simplex, usize>>,
    /// `boundary[p - 1]` is `∂_p`.
    pub boundary: Vec<DMatrix<i64>>,
}

impl SimplicialChainData {
    pub fn dims(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    pub fn index_of(&self, s: &[u32]) -> Option<usize> {
        self.index.get(s.len().checked_sub(1)?)?.get(s).copied()
    }

    pub fn complex(&self) -> ChainComplex {
        ChainComplex::new(self.dims(), self.boundary.iter().map(from_i64).collect())
            .expect("boundary matrices have consistent shapes")
    }

    /// True iff every `∂_p ∂_{p+1}` vanishes in integer arithmetic.
    pub fn boundaries_compose_to_zero(&self) -> bool {
        self.boundary.windows(2).all(|w| (&w[0] * &w[1]).iter().all(|&x| x == 0))
    }
}

/// Enumerate all faces of all facets and assemble `∂_p σ = Σ (−1)^i ∂_i σ`.
pub fn enumerate_and_boundaries(m: &OrientedSimplicialManifold) -> SimplicialChainData {
    let n = m.dim;
    let mut sets: Vec<BTreeSet<Simplex>> = vec![BTreeSet::new(); n + 1];
    for f in &m.facets {
        for (p, set) in sets.iter_mut().enumerate() {
            set.extend(faces_of_size(&f.verts, p + 1));
        }
    }
    let simplices: Vec<Vec<Simplex>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
    let index: Vec<HashMap<Simplex, usize>> = simplices
        .iter()
        .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
        .collect();
    let boundary = (1..=n)
        .map(|p| {
            let mut b = DMatrix::<i64>::zeros(simplices[p - 1].len(), simplices[p].len());
            for (j, s) in simplices[p].iter().enumerate() {
                for i in 0..s.len() {
                    let mut face = s.clone();
                    face.remove(i);
                    b[(index[p - 1][&face], j)] += if i % 2 == 0 { 1 } else { -1 };
                }
            }
            b
        })
        .collect();
    SimplicialChainData {
        simplices,
        index,
        boundary,
    }
}

/// `[M] = Σ ε(σ)[σ]` as an integer chain in top degree, after checking that
/// its boundary vanishes away from the boundary faces.
pub fn fundamental_cycle(m: &OrientedSimplicialManifold, data: &SimplicialChainData) -> Result<Vec<i64>> {
    let n = m.dim;
    let mut chain = vec![0i64; data.simplices[n].len()];
    for f in &m.facets {
        chain[data.index[n][&f.verts]] = f.sign;
    }
    if n > 0 {
        let boundary_faces: BTreeSet<Simplex> = m.boundary_ridges().into_iter().collect();
        let db = &data.boundary[n - 1] * DMatrix::from_column_slice(chain.len(), 1, &chain);
        let bad = data.simplices[n - 1]
            .iter()
            .enumerate()
            .filter(|(i, s)| db[(*i, 0)] != 0 && !boundary_faces.contains(*s))
            .count();
        if bad > 0 {
            return Err(Error::IncoherentOrientation(bad));
        }
    }
    Ok(chain)
}

/// Integer cap-product matrices `T_p: C^{n−p} → C_p`, `T_p(u) = Σ ε(σ)
/// u(front_{n−p} σ) back_p σ`, front and back taken in the vertex order.
pub fn cap_duality(m: &OrientedSimplicialManifold, data: &SimplicialChainData, cycle: &[i64]) -> Vec<DMatrix<i64>> {
    let n = m.dim;
    (0..=n)
        .map(|p| {
            let q = n - p;
            let mut t = DMatrix::<i64>::zeros(data.simplices[p].len(), data.simplices[q].len());
            for (sigma, &eps) in data.simplices[n].iter().zip(cycle) {
                if eps == 0 {
                    continue;
                }
                let back = &sigma[q..];
                let front = &sigma[..=q];
                t[(data.index[p][back], data.index[q][front])] += eps;
            }
            t
        })
        .collect()
}

/// Phase `c(p, n)` with `S_p = c(p, n)·T_p`: `i^{p(p+1) + n/2}` for even `n`
/// and `i^{p(p−1) − n(n−1)/2}` for odd `n`.
pub fn duality_phase(p: usize, n: usize) -> Complex64 {
    let exponent = if n.is_multiple_of(2) {
        (p * (p + 1) + n / 2) as i64
    } else {
        (p * (p.saturating_sub(1))) as i64 - (n * (n - 1) / 2) as i64
    };
    match exponent.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A finite group acting on the vertices; `vertex_maps[g][i]` is the image
/// of `vertices[i]`.
#[derive(Clone, Debug)]
pub struct SimplicialAction {
    group: Arc<FiniteGroup>,
    vertex_maps: Vec<Vec<u32>>,
}

impl SimplicialAction {
    /// Validate that every map is a bijection of the vertex set sending
    /// facets to facets and that `map[gh] = map[g] ∘ map[h]`.
    pub fn new(m: &OrientedSimplicialManifold, group: Arc<FiniteGroup>, vertex_maps: Vec<Vec<u32>>) -> Result<Self> {
        if vertex_maps.len() != group.order() {
            return Err(Error::InvalidAction(format!(
                "{} vertex maps for a group of order {}",
                vertex_maps.len(),
                group.order()
            )));
        }
        for (g, map) in vertex_maps.iter().enumerate() {
            if map.len() != m.vertices.len() {
                return Err(Error::NotSimplicial {
                    element: g,
                    reason: format!("maps {} vertices, manifold has {}", map.len(), m.vertices.len()),
                });
            }
            let mut image = map.clone();
            image.sort_unstable();
            if image != m.vertices {
                return Err(Error::NotSimplicial {
                    element: g,
                    reason: "vertex map is not a bijection of the vertex set".into(),
                });
            }
        }
        let action = SimplicialAction { group, vertex_maps };
        let facets: BTreeSet<&Simplex> = m.facets.iter().map(|f| &f.verts).collect();
        for g in 0..action.group.order() {
            for f in &m.facets {
                let (image, _) = action.apply(m, g, &f.verts);
                if !facets.contains(&image) {
                    return Err(Error::NotSimplicial {
                        element: g,
                        reason: format!("facet {:?} is sent to the non-facet {image:?}", f.verts),
                    });
                }
            }
        }
        for a in 0..action.group.order() {
            for b in 0..action.group.order() {
                let ab = action.group.mul(a, b);
                for &v in &m.vertices {
                    let composed = action.vertex(m, a, action.vertex(m, b, v));
                    if composed != action.vertex(m, ab, v) {
                        return Err(Error::InvalidAction(format!(
                            "vertex maps do not compose: map[{ab}] differs from map[{a}] ∘ map[{b}] at vertex {v}"
                        )));
                    }
                }
            }
        }
        Ok(action)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn vertex_maps(&self) -> &[Vec<u32>] {
        &self.vertex_maps
    }

    fn vertex(&self, m: &OrientedSimplicialManifold, g: usize, v: u32) -> u32 {
        let i = m.vertices.binary_search(&v).expect("vertex of the manifold");
        self.vertex_maps[g][i]
    }

    /// Sorted image of a simplex and the parity of the sorting permutation.
    pub fn apply(&self, m: &OrientedSimplicialManifold, g: usize, s: &[u32]) -> (Simplex, i64) {
        let mut image: Simplex = s.iter().map(|&v| self.vertex(m, g, v)).collect();
        let sign = sort_with_parity(&mut image).expect("vertex maps are injective");
        (image, sign)
    }

    /// True iff every element preserves the vertex order on every simplex,
    /// in which case the cap product is equivariant without averaging.
    pub fn preserves_vertex_order(&self, m: &OrientedSimplicialManifold, data: &SimplicialChainData) -> bool {
        (0..self.group.order()).all(|g| {
            data.simplices
                .iter()
                .flatten()
                .all(|s| self.apply(m, g, s).1 == 1)
        })
    }
}

/// Integer signed-permutation matrices of the pushforward action, per
/// element and degree.
fn integer_chain_action(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    a: &SimplicialAction,
) -> Vec<Vec<DMatrix<i64>>> {
    (0..a.group.order())
        .map(|g| {
            data.simplices
                .iter()
                .enumerate()
                .map(|(p, list)| {
                    let mut r = DMatrix::<i64>::zeros(list.len(), list.len());
                    for (j, s) in list.iter().enumerate() {
                        let (image, sign) = a.apply(m, g, s);
                        r[(data.index[p][&image], j)] = sign;
                    }
                    r
                })
                .collect()
        })
        .collect()
}

/// Cochain action `(u·g)[σ] = u(g σ)` with the orientation sign of `g σ`,
/// built directly from the vertex maps.
fn integer_cochain_action(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    a: &SimplicialAction,
    g: usize,
    p: usize,
) -> DMatrix<i64> {
    let list = &data.simplices[p];
    let mut k = DMatrix::<i64>::zeros(list.len(), list.len());
    for (i, s) in list.iter().enumerate() {
        let (image, sign) = a.apply(m, g, s);
        k[(i, data.index[p][&image])] = sign;
    }
    k
}

fn check_regular_and_orientation(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    a: &SimplicialAction,
    cycle: &[i64],
    rho: &[Vec<DMatrix<i64>>],
) -> Result<()> {
    #[allow(clippy::needless_range_loop)]
    for g in 0..a.group.order() {
        for s in data.simplices.iter().flatten() {
            let (image, _) = a.apply(m, g, s);
            if image == *s && s.iter().any(|&v| a.vertex(m, g, v) != v) {
                return Err(Error::NonRegularAction {
                    element: g,
                    simplex: s.clone(),
                });
            }
        }
        let top = &rho[g][m.dim];
        let pushed = top * DMatrix::from_column_slice(cycle.len(), 1, cycle);
        if pushed.iter().zip(cycle).any(|(x, y)| x != y) {
            return Err(Error::OrientationReversing(g));
        }
    }
    Ok(())
}

/// The unitary action on chains: `ρ(g)[σ] = sign · [sorted g(σ)]`.
pub fn chain_action(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    a: &SimplicialAction,
) -> Result<GroupAction> {
    let cycle = fundamental_cycle(m, data)?;
    let rho = integer_chain_action(m, data, a);
    check_regular_and_orientation(m, data, a, &cycle, &rho)?;
    let matrices = rho.iter().map(|per| per.iter().map(from_i64).collect()).collect();
    GroupAction::new(a.group.clone(), matrices, &data.dims())
}

/// `T̄ = |G|⁻¹ Σ_g ρ(g) T K_g`, the average of the cap product over the
/// action; equal to `T` when the action preserves the vertex order.
fn averaged_cap(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    a: &SimplicialAction,
    t: &[DMatrix<i64>],
) -> Vec<CMatrix> {
    let n = m.dim;
    let rho = integer_chain_action(m, data, a);
    let order = a.group.order() as f64;
    (0..=n)
        .map(|p| {
            let mut sum = DMatrix::<i64>::zeros(t[p].nrows(), t[p].ncols());
            for (g, per) in rho.iter().enumerate() {
                sum += &per[p] * &t[p] * integer_cochain_action(m, data, a, g, n - p);
            }
            from_i64(&sum).map(|z| z / order)
        })
        .collect()
}

/// The symmetrised duality `S = ½(S' + S'*)` with `S'_p = c(p, n)·T_p`.
#[derive(Clone, Debug)]
pub struct SimplicialDuality {
    pub duality: DualityOperator,
    /// `‖S' − S'*‖` before symmetrisation.
    pub symmetrization_residual: f64,
    /// Largest `‖T_p K_g − ρ(g⁻¹) T_p‖` of the literal cap product, when an
    /// action is present.
    pub raw_equivariance_residual: Option<f64>,
}

fn assemble_duality(n: usize, dims: &[usize], t: &[CMatrix]) -> (DualityOperator, f64) {
    let blocks: Vec<CMatrix> = (0..=n).map(|p| t[p].map(|z| z * duality_phase(p, n))).collect();
    let raw = DualityOperator::new(dims, blocks).expect("cap blocks have duality shapes");
    let g = crate::hpcomplex::Grading::new(dims);
    let s = raw.total(&g);
    let residual = norm(&(&s - s.adjoint()));
    let sym = (&s + s.adjoint()).map(|z| z * 0.5);
    (DualityOperator::from_total(dims, &sym), residual)
}

fn raw_equivariance(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    a: &SimplicialAction,
    t: &[CMatrix],
) -> (f64, usize, usize) {
    let n = m.dim;
    let rho = integer_chain_action(m, data, a);
    let mut worst = (0.0_f64, 0, 0);
    for g in 0..a.group.order() {
        let ginv = a.group.inverse(g);
        for p in 0..=n {
            let k = from_i64(&integer_cochain_action(m, data, a, g, n - p));
            let r = norm(&(&t[p] * k - from_i64(&rho[ginv][p]) * &t[p]));
            if r > worst.0 {
                worst = (r, g, p);
            }
        }
    }
    worst
}

/// Build the (symmetrised, and with an action also group-averaged) duality
/// operator of the cap product.
pub fn duality_operator(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    action: Option<&SimplicialAction>,
) -> Result<SimplicialDuality> {
    let cycle = fundamental_cycle(m, data)?;
    let t = cap_duality(m, data, &cycle);
    let t_complex: Vec<CMatrix> = t.iter().map(from_i64).collect();
    let (used, raw_equivariance_residual) = match action {
        Some(a) => (averaged_cap(m, data, a, &t), Some(raw_equivariance(m, data, a, &t_complex).0)),
        None => (t_complex, None),
    };
    let (duality, symmetrization_residual) = assemble_duality(m.dim, &data.dims(), &used);
    Ok(SimplicialDuality {
        duality,
        symmetrization_residual,
        raw_equivariance_residual,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceCheck {
    /// `max ‖T_p K_g − ρ(g⁻¹) T_p‖` for the duality actually used.
    pub residual: f64,
    /// Same quantity for the literal cap product.
    pub raw_residual: f64,
    /// `max ‖ρ(g) b − b ρ(g)‖`.
    pub differential_residual: f64,
    pub preserves_vertex_order: bool,
    pub worst_element: usize,
    pub worst_degree: usize,
    pub passed: bool,
}

/// Compare the cochain action (built independently from the vertex maps)
/// with the chain action through the duality, and check `ρ(g)b = bρ(g)`.
pub fn verify_equivariance(
    m: &OrientedSimplicialManifold,
    data: &SimplicialChainData,
    a: &SimplicialAction,
    tol: f64,
) -> Result<EquivarianceCheck> {
    let n = m.dim;
    let cycle = fundamental_cycle(m, data)?;
    let t = cap_duality(m, data, &cycle);
    let raw: Vec<CMatrix> = t.iter().map(from_i64).collect();
    let averaged = averaged_cap(m, data, a, &t);
    let (raw_residual, _, _) = raw_equivariance(m, data, a, &raw);
    let (residual, worst_element, worst_degree) = raw_equivariance(m, data, a, &averaged);
    let action = chain_action(m, data, a)?;
    let mut differential_residual: f64 = 0.0;
    for g in 0..a.group.order() {
        for p in 1..=n {
            let b = from_i64(&data.boundary[p - 1]);
            let r = norm(&(action.matrix(g, p - 1) * &b - &b * action.matrix(g, p)));
            differential_residual = differential_residual.max(r);
        }
    }
    let passed = residual <= tol && differential_residual <= tol;
    let report = EquivarianceCheck {
        residual,
        raw_residual,
        differential_residual,
        preserves_vertex_order: a.preserves_vertex_order(m, data),
        worst_element,
        worst_degree,
        passed,
    };
    if !passed {
        return Err(Error::EquivarianceViolated {
            element: worst_element,
            degree: worst_degree,
            residual: residual.max(differential_residual),
        });
    }
    Ok(report)
}

/// The Hilbert–Poincaré complex of a closed oriented manifold.
#[derive(Clone, Debug)]
pub struct SimplicialHp {
    pub hp: HilbertPoincareComplex,
    pub data: SimplicialChainData,
    pub symmetrization_residual: f64,
    pub raw_equivariance_residual: Option<f64>,
    pub report: DualityReport,
}

pub fn to_hp_complex(
    m: &OrientedSimplicialManifold,
    action: Option<&SimplicialAction>,
    tol: f64,
) -> Result<SimplicialHp> {
    if m.with_boundary && !m.boundary_ridges().is_empty() {
        return Err(Error::PreconditionViolated(
            "the manifold has boundary; use the bordism commands".into(),
        ));
    }
    let data = enumerate_and_boundaries(m);
    let dual = duality_operator(m, &data, action)?;
    let group_action = action.map(|a| chain_action(m, &data, a)).transpose()?;
    let hp = HilbertPoincareComplex::new(data.complex(), dual.duality, group_action)?;
    let report = verify_duality(&hp, tol)?;
    if let Some(err) = report.failure() {
        return Err(err);
    }
    Ok(SimplicialHp {
        hp,
        data,
        symmetrization_residual: dual.symmetrization_residual,
        raw_equivariance_residual: dual.raw_equivariance_residual,
        report,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifoldSignature {
    pub signature: K0Class,
    pub dims: Vec<usize>,
    pub symmetrization_residual: f64,
    pub raw_equivariance_residual: Option<f64>,
    pub cone_min_singular_value: f64,
    pub coincidence: CoincidenceReport,
}

/// All three signatures of the simplicial Hilbert–Poincaré complex; fails
/// with `CoincidenceFailed` if they differ.
pub fn manifold_signature(
    m: &OrientedSimplicialManifold,
    action: Option<&SimplicialAction>,
    tol: f64,
) -> Result<ManifoldSignature> {
    if m.dim % 2 == 1 {
        return Err(Error::OddDimension(m.dim));
    }
    let built = to_hp_complex(m, action, tol)?;
    let coincidence = check_coincidence(&built.hp, tol)?;
    let signature = coincidence.clone().into_result()?;
    Ok(ManifoldSignature {
        signature,
        dims: built.data.dims(),
        symmetrization_residual: built.symmetrization_residual,
        raw_equivariance_residual: built.raw_equivariance_residual,
        cone_min_singular_value: built.report.cone_min_singular_value,
        coincidence,
    })
}

/// The complex with boundary of a manifold with boundary: `E₀` is spanned by
/// the simplices of the boundary, `S` is the symmetrised cap with `[W]`.
pub fn bordism_to_cwb(w: &OrientedSimplicialManifold, tol: f64) -> Result<ComplexWithBoundary> {
    let ridges = w.boundary_ridges();
    if ridges.is_empty() {
        return Err(Error::BoundaryConditionViolated {
            condition: "nonempty boundary",
            detail: "every codimension-one face lies in two facets".into(),
        });
    }
    let data = enumerate_and_boundaries(w);
    let dual = duality_operator(w, &data, None)?;
    let mut on_boundary: BTreeSet<Simplex> = BTreeSet::new();
    for r in &ridges {
        for size in 1..=r.len() {
            on_boundary.extend(faces_of_size(r, size));
        }
    }
    let split: Vec<Vec<usize>> = data
        .simplices
        .iter()
        .map(|list| {
            list.iter()
                .enumerate()
                .filter(|(_, s)| on_boundary.contains(*s))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let cwb = ComplexWithBoundary::new(data.complex(), dual.duality, split)?;
    let report = verify_boundary_conditions(&cwb, tol)?;
    if let Some(err) = report.failure() {
        return Err(err);
    }
    Ok(cwb)
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryStats {
    /// Largest number of simplices in the closed star of a vertex, i.e. all
    /// faces of all simplices containing it.
    pub max_closed_star: usize,
    pub star_convention: &'static str,
    /// Largest stabiliser order of a simplex (setwise), 1 without action.
    pub max_isotropy: usize,
    pub f_vector: Vec<usize>,
}

pub fn geometry_stats(m: &OrientedSimplicialManifold, action: Option<&SimplicialAction>) -> GeometryStats {
    let data = enumerate_and_boundaries(m);
    let mut max_closed_star = 0;
    for &v in &m.vertices {
        let mut star: BTreeSet<Simplex> = BTreeSet::new();
        for f in m.facets.iter().filter(|f| f.verts.contains(&v)) {
            for size in 1..=f.verts.len() {
                star.extend(faces_of_size(&f.verts, size));
            }
        }
        max_closed_star = max_closed_star.max(star.len());
    }
    let max_isotropy = match action {
        None => 1,
        Some(a) => data
            .simplices
            .iter()
            .flatten()
            .map(|s| (0..a.group.order()).filter(|&g| a.apply(m, g, s).0 == *s).count())
            .max()
            .unwrap_or(1),
    };
    GeometryStats {
        max_closed_star,
        star_convention: "closed star: every face of every simplex containing the vertex, the vertex included",
        max_isotropy,
        f_vector: data.dims(),
    }
}

/// Barycentric subdivision. New vertices are the simplices of `m` ordered by
/// dimension, then lexicographically; the id of a new vertex is its
/// position in that order. The action, if any, is carried along.
pub fn subdivide(
    m: &OrientedSimplicialManifold,
    action: Option<&SimplicialAction>,
) -> Result<(OrientedSimplicialManifold, Option<SimplicialAction>)> {
    let data = enumerate_and_boundaries(m);
    let all: Vec<&Simplex> = data.simplices.iter().flatten().collect();
    let id: HashMap<&Simplex, u32> = all.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
    let mut facets = Vec::new();
    for f in &m.facets {
        // flags σ = τ_n ⊃ … ⊃ τ_0 with the sign of the iterated cone formula
        let mut stack: Vec<(Simplex, Vec<u32>, i64)> = vec![(f.verts.clone(), vec![id[&f.verts]], f.sign)];
        while let Some((tau, chain, sign)) = stack.pop() {
            if tau.len() == 1 {
                let mut verts = chain.clone();
                let parity = sort_with_parity(&mut verts).expect("flag vertices are distinct");
                facets.push((verts, sign * parity));
                continue;
            }
            for i in 0..tau.len() {
                let mut face = tau.clone();
                face.remove(i);
                let mut next = chain.clone();
                next.push(id[&face]);
                stack.push((face, next, if i % 2 == 0 { sign } else { -sign }));
            }
        }
    }
    let vertices: Vec<u32> = (0..all.len() as u32).collect();
    let sd = OrientedSimplicialManifold::new(m.dim, vertices, facets, m.with_boundary)?;
    let sd_action = match action {
        None => None,
        Some(a) => {
            let maps = (0..a.group.order())
                .map(|g| all.iter().map(|s| id[&a.apply(m, g, s).0]).collect())
                .collect();
            Some(SimplicialAction::new(&sd, a.group.clone(), maps)?)
        }
    };
    Ok((sd, sd_action))
}

/// Check `‖T_p‖`-scaled chain relation `bS + Sb* = 0` for diagnostics.
pub fn chain_relation_residual(hp: &HilbertPoincareComplex, tol: f64) -> (f64, f64) {
    let b = hp.total_b();
    let s = hp.total_s();
    let r = norm(&(&b * &s + &s * b.adjoint()));
    (r, threshold(tol, norm(&b) * norm(&s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn boundary_of_tetrahedron() -> OrientedSimplicialManifold {
        // facets opposite vertex i with sign (−1)^i
        let facets = (0..4u32)
            .map(|i| {
                let f: Vec<u32> = (0..4).filter(|&v| v != i).collect();
                (f, if i % 2 == 0 { 1 } else { -1 })
            })
            .collect();
        OrientedSimplicialManifold::new(2, vec![0, 1, 2, 3], facets, false).unwrap()
    }

    fn simplex(n: u32) -> OrientedSimplicialManifold {
        OrientedSimplicialManifold::new(n as usize, (0..=n).collect(), vec![((0..=n).collect(), 1)], true).unwrap()
    }

    #[test]
    fn parity() {
        let mut v = vec![2, 0, 1];
        assert_eq!(sort_with_parity(&mut v), Some(1));
        let mut v = vec![1, 0, 2];
        assert_eq!(sort_with_parity(&mut v), Some(-1));
        assert_eq!(v, vec![0, 1, 2]);
        assert_eq!(sort_with_parity(&mut [1, 1]), None);
    }

    #[test]
    fn face_counts() {
        assert_eq!(enumerate_and_boundaries(&simplex(2)).dims(), vec![3, 3, 1]);
        let d = enumerate_and_boundaries(&boundary_of_tetrahedron());
        assert_eq!(d.dims(), vec![4, 6, 4]);
        assert!(d.boundaries_compose_to_zero());
    }

    #[test]
    fn fundamental_cycles() {
        let m = boundary_of_tetrahedron();
        let d = enumerate_and_boundaries(&m);
        assert!(fundamental_cycle(&m, &d).is_ok());
        let bad = OrientedSimplicialManifold::new(
            2,
            vec![0, 1, 2, 3],
            vec![(vec![1, 2, 3], 1), (vec![0, 2, 3], 1), (vec![0, 1, 3], 1), (vec![0, 1, 2], 1)],
            false,
        )
        .unwrap();
        let d = enumerate_and_boundaries(&bad);
        assert!(matches!(fundamental_cycle(&bad, &d), Err(Error::IncoherentOrientation(_))));
        let interval = simplex(1);
        let d = enumerate_and_boundaries(&interval);
        assert_eq!(fundamental_cycle(&interval, &d).unwrap(), vec![1]);
    }

    #[test]
    fn invalid_facets() {
        assert!(OrientedSimplicialManifold::new(1, vec![0, 1], vec![(vec![0, 0], 1)], true).is_err());
        assert!(OrientedSimplicialManifold::new(1, vec![0, 1], vec![(vec![0, 2], 1)], true).is_err());
        assert!(OrientedSimplicialManifold::new(1, vec![0, 1], vec![(vec![0, 1], 2)], true).is_err());
        assert!(OrientedSimplicialManifold::new(1, vec![0, 1], vec![(vec![0, 1], 1)], false).is_err());
        // unsorted input is canonicalised with the permutation sign
        let m = OrientedSimplicialManifold::new(1, vec![0, 1], vec![(vec![1, 0], 1)], true).unwrap();
        assert_eq!(m.facets()[0], Facet { verts: vec![0, 1], sign: -1 });
    }

    #[test]
    fn point_duality() {
        let point = OrientedSimplicialManifold::new(0, vec![7], vec![(vec![7], 1)], false).unwrap();
        let d = enumerate_and_boundaries(&point);
        let t = cap_duality(&point, &d, &fundamental_cycle(&point, &d).unwrap());
        assert_eq!(t[0], DMatrix::from_element(1, 1, 1));
        let built = to_hp_complex(&point, None, 1e-9).unwrap();
        assert_eq!(built.hp.duality().block(0)[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(manifold_signature(&point, None, 1e-9).unwrap().signature.virtual_dimension(), 1);
    }

    #[test]
    fn interval_cap() {
        let m = simplex(1);
        let d = enumerate_and_boundaries(&m);
        let t = cap_duality(&m, &d, &[1]);
        // T_0 sends the dual of [01] to the back vertex [1]; T_1 sends the dual of [0] to [01]
        assert_eq!(t[0], DMatrix::from_column_slice(2, 1, &[0, 1]));
        assert_eq!(t[1], DMatrix::from_row_slice(1, 2, &[1, 0]));
    }

    #[test]
    fn sphere_signature_zero() {
        let s = manifold_signature(&boundary_of_tetrahedron(), None, 1e-9).unwrap();
        assert!(s.signature.is_zero(1e-6));
        assert!(s.coincidence.agree);
    }

    #[test]
    fn interval_and_tetrahedron_bordisms() {
        for n in [1, 3] {
            let cwb = bordism_to_cwb(&simplex(n), 1e-9).unwrap();
            let bc = crate::bordism::boundary_complex(&cwb, 1e-9).unwrap();
            assert!(bc.formula_residual <= 1e-9);
            assert!(crate::bordism::boundary_signature_is_zero(&cwb, 1e-9).unwrap().passed);
            assert!(crate::bordism::verify_cone_identities(&cwb, 1e-9).unwrap().passed);
        }
        let cwb = bordism_to_cwb(&simplex(1), 1e-9).unwrap();
        let bc = crate::bordism::boundary_complex(&cwb, 1e-9).unwrap();
        let expected = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
        ]));
        assert!(norm(&(&bc.s0 - expected)) < 1e-12);
        // the disk has an odd-dimensional boundary
        let cwb = bordism_to_cwb(&simplex(2), 1e-9).unwrap();
        assert!(matches!(
            crate::bordism::boundary_signature_is_zero(&cwb, 1e-9),
            Err(Error::OddDimension(1))
        ));
        assert!(bordism_to_cwb(&boundary_of_tetrahedron().clone(), 1e-9).is_err());
    }

    #[test]
    fn star_and_isotropy() {
        assert_eq!(geometry_stats(&simplex(2), None).max_closed_star, 7);
        assert_eq!(geometry_stats(&simplex(2), None).max_isotropy, 1);
    }

    #[test]
    fn subdivision_of_sphere() {
        let m = boundary_of_tetrahedron();
        let (sd, _) = subdivide(&m, None).unwrap();
        assert_eq!(sd.facets().len(), 24);
        let d = enumerate_and_boundaries(&sd);
        assert!(fundamental_cycle(&sd, &d).is_ok());
        assert!(manifold_signature(&sd, None, 1e-9).unwrap().signature.is_zero(1e-6));
    }

    #[test]
    fn orientation_reversing_action_is_rejected() {
        let m = boundary_of_tetrahedron();
        let g = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let a = SimplicialAction::new(&m, g, vec![vec![0, 1, 2, 3], vec![1, 0, 2, 3]]).unwrap();
        let d = enumerate_and_boundaries(&m);
        assert!(matches!(chain_action(&m, &d, &a), Err(Error::NonRegularAction { .. }) | Err(Error::OrientationReversing(_))));
    }
}
