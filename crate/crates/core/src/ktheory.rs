//! Finite groups, unitary actions on graded spaces, and K₀-classes of
//! finite group algebras represented by their characters.
//!
//! A finite-dimensional representation of `ℂ[G]` is determined up to
//! isomorphism by its character, so a formal difference `[P₊] − [P₋]` of
//! equivariant projections is stored as the class function
//! `g ↦ tr(ρ(g)P₊) − tr(ρ(g)P₋)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{identity, norm, threshold, unitary_residual, CMatrix};

/// Absolute tolerance for comparing character values.
pub const CHARACTER_TOL: f64 = 1e-6;

/// Groups beyond this order are rejected; associativity is checked in O(|G|³).
pub const MAX_GROUP_ORDER: usize = 256;

/// A finite group given by its multiplication table.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    mult: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    classes: Vec<Vec<usize>>,
    class_of: Vec<usize>,
}

impl PartialEq for FiniteGroup {
    fn eq(&self, other: &Self) -> bool {
        self.mult == other.mult
    }
}

impl Eq for FiniteGroup {}

impl FiniteGroup {
    /// Validate a multiplication table (`mult[g][h] = gh`) and derive
    /// identity, inverses and conjugacy classes.
    pub fn from_table(mult: Vec<Vec<usize>>) -> Result<Self> {
        let n = mult.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty multiplication table".into()));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::InvalidGroup(format!(
                "order {n} exceeds the supported maximum {MAX_GROUP_ORDER}"
            )));
        }
        for (g, row) in mult.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidGroup(format!("row {g} has length {}", row.len())));
            }
            if let Some(&x) = row.iter().find(|&&x| x >= n) {
                return Err(Error::InvalidGroup(format!("entry {x} out of range in row {g}")));
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mult[e][x] == x && mult[x][e] == x))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        #[allow(clippy::needless_range_loop)]
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| mult[g][h] == identity && mult[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
            inverse.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                let ab = mult[a][b];
                for c in 0..n {
                    if mult[ab][c] != mult[a][mult[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails for ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let mut class_of = vec![usize::MAX; n];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            if class_of[x] != usize::MAX {
                continue;
            }
            let mut class: Vec<usize> = (0..n).map(|g| mult[mult[g][x]][inverse[g]]).collect();
            class.sort_unstable();
            class.dedup();
            for &y in &class {
                class_of[y] = classes.len();
            }
            classes.push(class);
        }
        Ok(FiniteGroup {
            mult,
            identity,
            inverse,
            classes,
            class_of,
        })
    }

    /// Cyclic group ℤ/m with element `k` standing for `g^k`.
    pub fn cyclic(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidGroup("cyclic group of order 0".into()));
        }
        Self::from_table((0..m).map(|a| (0..m).map(|b| (a + b) % m).collect()).collect())
    }

    pub fn trivial() -> Self {
        Self::cyclic(1).expect("trivial group")
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mult[g][h]
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverse[g]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    /// Conjugacy classes; class 0 is `{e}` whenever the identity is element 0.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }
}

/// Unitary action of a finite group on a graded space, stored per element
/// and per degree. `matrices[g][k]` acts on the degree-`k` summand.
#[derive(Clone, Debug)]
pub struct GroupAction {
    group: Arc<FiniteGroup>,
    matrices: Vec<Vec<CMatrix>>,
}

/// Residuals of the representation axioms.
#[derive(Clone, Debug, Serialize)]
pub struct ActionReport {
    pub unitarity_residual: f64,
    pub homomorphism_residual: f64,
    pub identity_residual: f64,
    pub passed: bool,
}

impl GroupAction {
    /// Build an action after checking shapes against the graded dimensions.
    pub fn new(group: Arc<FiniteGroup>, matrices: Vec<Vec<CMatrix>>, dims: &[usize]) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::ShapeMismatch(format!(
                "action lists {} elements, group has order {}",
                matrices.len(),
                group.order()
            )));
        }
        for (g, per_degree) in matrices.iter().enumerate() {
            if per_degree.len() != dims.len() {
                return Err(Error::ShapeMismatch(format!(
                    "action of element {g} has {} degrees, expected {}",
                    per_degree.len(),
                    dims.len()
                )));
            }
            for (k, m) in per_degree.iter().enumerate() {
                if m.shape() != (dims[k], dims[k]) {
                    return Err(Error::ShapeMismatch(format!(
                        "action of element {g} in degree {k} is {}x{}, expected {}x{}",
                        m.nrows(),
                        m.ncols(),
                        dims[k],
                        dims[k]
                    )));
                }
            }
        }
        Ok(GroupAction { group, matrices })
    }

    /// Action through a single representation `V` of the group on every
    /// degree, `ρ(g) = V(g)` in each degree (degree dims must equal dim V
    /// times a multiplicity handled by the caller).
    pub fn trivial(group: Arc<FiniteGroup>, dims: &[usize]) -> Self {
        let matrices = (0..group.order())
            .map(|_| dims.iter().map(|&d| identity(d)).collect())
            .collect();
        GroupAction { group, matrices }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn matrix(&self, g: usize, degree: usize) -> &CMatrix {
        &self.matrices[g][degree]
    }

    pub fn matrices(&self) -> &[Vec<CMatrix>] {
        &self.matrices
    }

    pub fn degrees(&self) -> usize {
        self.matrices.first().map_or(0, Vec::len)
    }

    /// Check unitarity, `ρ(g)ρ(h) = ρ(gh)` and `ρ(e) = 1`.
    pub fn verify(&self, tol: f64) -> ActionReport {
        let g = &self.group;
        let mut unitarity: f64 = 0.0;
        let mut hom: f64 = 0.0;
        let mut ident: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for a in 0..g.order() {
            for (k, m) in self.matrices[a].iter().enumerate() {
                unitarity = unitarity.max(unitary_residual(m));
                scale = scale.max((m.nrows() as f64).sqrt());
                if a == g.identity() {
                    ident = ident.max(norm(&(m - identity(m.nrows()))));
                }
                for b in 0..g.order() {
                    let prod = m * &self.matrices[b][k];
                    hom = hom.max(norm(&(prod - &self.matrices[g.mul(a, b)][k])));
                }
            }
        }
        let thr = threshold(tol, scale);
        ActionReport {
            unitarity_residual: unitarity,
            homomorphism_residual: hom,
            identity_residual: ident,
            passed: unitarity <= thr && hom <= thr && ident <= thr,
        }
    }

    /// Block-diagonal action on the total space.
    pub fn total(&self) -> Representation {
        let matrices = self
            .matrices
            .iter()
            .map(|per_degree| {
                let blocks: Vec<&CMatrix> = per_degree.iter().collect();
                crate::spectral::block_diag(&blocks)
            })
            .collect();
        Representation {
            group: self.group.clone(),
            matrices,
        }
    }

    pub(crate) fn from_parts(group: Arc<FiniteGroup>, matrices: Vec<Vec<CMatrix>>) -> Self {
        GroupAction { group, matrices }
    }
}

/// A representation on an ungraded space (one matrix per element).
#[derive(Clone, Debug)]
pub struct Representation {
    pub group: Arc<FiniteGroup>,
    pub matrices: Vec<CMatrix>,
}

impl Representation {
    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, CMatrix::nrows)
    }

    /// Conjugate every matrix: `ρ'(g) = v* ρ(g) v` (restriction to the
    /// range of an isometry `v` that is invariant under the action).
    pub fn compress(&self, v: &CMatrix) -> Representation {
        Representation {
            group: self.group.clone(),
            matrices: self.matrices.iter().map(|m| v.adjoint() * m * v).collect(),
        }
    }
}

/// Element of K₀(ℂ[G]) as a virtual character, one value per conjugacy class.
#[derive(Clone, Debug)]
pub struct K0Class {
    group: Arc<FiniteGroup>,
    values: Vec<Complex64>,
}

impl K0Class {
    pub fn zero(group: Arc<FiniteGroup>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); group.classes().len()];
        K0Class { group, values }
    }

    /// Integer class over the trivial group.
    pub fn integer(n: i64) -> Self {
        K0Class {
            group: Arc::new(FiniteGroup::trivial()),
            values: vec![Complex64::new(n as f64, 0.0)],
        }
    }

    pub fn from_class_values(group: Arc<FiniteGroup>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != group.classes().len() {
            return Err(Error::ShapeMismatch(format!(
                "{} character values for {} conjugacy classes",
                values.len(),
                group.classes().len()
            )));
        }
        Ok(K0Class { group, values })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    /// Character values per conjugacy class.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Character value at element `g`.
    pub fn at(&self, g: usize) -> Complex64 {
        self.values[self.group.class_of(g)]
    }

    /// Value at the identity: the virtual dimension, rank(P₊) − rank(P₋).
    pub fn virtual_dimension(&self) -> i64 {
        self.at(self.group.identity()).re.round() as i64
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.norm() <= tol)
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.group, &other.group) || *self.group == *other.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }
}

pub fn k0_add(a: &K0Class, b: &K0Class) -> Result<K0Class> {
    a.same_group(b)?;
    Ok(K0Class {
        group: a.group.clone(),
        values: a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(),
    })
}

pub fn k0_negate(a: &K0Class) -> K0Class {
    K0Class {
        group: a.group.clone(),
        values: a.values.iter().map(|x| -x).collect(),
    }
}

/// Equality of character values within `tol` per class.
pub fn k0_equal(a: &K0Class, b: &K0Class, tol: f64) -> Result<bool> {
    a.same_group(b)?;
    Ok(a.values.iter().zip(&b.values).all(|(x, y)| (x - y).norm() <= tol))
}

/// `[P₊] − [P₋]` as a virtual character. Without an action the class lives
/// over the trivial group and equals the rank difference.
pub fn k0_from_projections(
    p_plus: &CMatrix,
    p_minus: &CMatrix,
    action: Option<&Representation>,
    tol: f64,
) -> Result<K0Class> {
    if p_plus.shape() != p_minus.shape() || !p_plus.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "projections of shapes {:?} and {:?}",
            p_plus.shape(),
            p_minus.shape()
        )));
    }
    let Some(rep) = action else {
        let d = p_plus.trace() - p_minus.trace();
        return Ok(K0Class {
            group: Arc::new(FiniteGroup::trivial()),
            values: vec![d],
        });
    };
    if rep.dim() != p_plus.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "representation of dimension {} on projections of size {}",
            rep.dim(),
            p_plus.nrows()
        )));
    }
    let group = &rep.group;
    let mut per_element = Vec::with_capacity(group.order());
    for (g, rho) in rep.matrices.iter().enumerate() {
        for (name, p) in [("P+", p_plus), ("P-", p_minus)] {
            let residual = norm(&(rho * p - p * rho));
            if residual > threshold(tol, norm(p)) {
                return Err(Error::NonEquivariantProjection(format!(
                    "{name} fails to commute with element {g}: residual {residual:.3e}"
                )));
            }
        }
        per_element.push((rho * p_plus).trace() - (rho * p_minus).trace());
    }
    let mut values = Vec::with_capacity(group.classes().len());
    for class in group.classes() {
        let first = per_element[class[0]];
        for &g in class {
            if (per_element[g] - first).norm() > CHARACTER_TOL {
                return Err(Error::NonEquivariantProjection(format!(
                    "character differs on the conjugacy class of element {}",
                    class[0]
                )));
            }
        }
        let mean = class.iter().map(|&g| per_element[g]).sum::<Complex64>() / class.len() as f64;
        values.push(mean);
    }
    Ok(K0Class {
        group: group.clone(),
        values,
    })
}

fn format_value(v: Complex64) -> String {
    let r = v.re.round();
    if (v.re - r).abs() <= CHARACTER_TOL && v.im.abs() <= CHARACTER_TOL {
        let r = r as i64;
        if r > 0 {
            format!("+{r}")
        } else {
            format!("{r}")
        }
    } else if v.im.abs() <= CHARACTER_TOL {
        format!("{:.6}", v.re)
    } else {
        format!("{:.6}{:+.6}i", v.re, v.im)
    }
}

impl fmt::Display for K0Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.group.is_trivial() {
            return write!(f, "{}", format_value(self.values[0]));
        }
        write!(f, "χ = [")?;
        for (i, (class, v)) in self.group.classes().iter().zip(&self.values).enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{}]: {}", class[0], format_value(*v))?;
        }
        write!(f, "]")
    }
}

impl Serialize for K0Class {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct ClassValue<'a> {
            elements: &'a [usize],
            value: [f64; 2],
        }
        let classes: Vec<ClassValue> = self
            .group
            .classes()
            .iter()
            .zip(&self.values)
            .map(|(c, v)| ClassValue {
                elements: c,
                value: [v.re, v.im],
            })
            .collect();
        let mut s = serializer.serialize_struct("K0Class", 3)?;
        s.serialize_field("display", &self.to_string())?;
        s.serialize_field("virtual_dimension", &self.virtual_dimension())?;
        s.serialize_field("classes", &classes)?;
        s.end()
    }
}
