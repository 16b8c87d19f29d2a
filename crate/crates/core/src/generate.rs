//! Seeded random instances: Hilbert–Poincaré complexes built from form and
//! hyperbolic pieces, and complexes with boundary built from cylinders.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bordism::{cylinder, hyperbolic, ComplexWithBoundary};
use crate::error::{Error, Result};
use crate::hpcomplex::{direct_sum, perturb_duality, twist, ChainComplex, DualityOperator, HilbertPoincareComplex};
use crate::ktheory::{FiniteGroup, GroupAction};
use crate::spectral::{exp_i_hermitian, identity, zeros, CMatrix, DEFAULT_TOL, ONE};

/// Shape constraints for generated instances.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Profile {
    /// Top degree, even.
    pub n: usize,
    /// Upper bound on the dimension of every degree.
    pub max_dim: usize,
    /// Order of a cyclic group acting on the instance, if any.
    pub group: Option<usize>,
}

impl Default for Profile {
    fn default() -> Self {
        Profile {
            n: 2,
            max_dim: 6,
            group: None,
        }
    }
}

impl Profile {
    pub const MAX_N: usize = 8;
    pub const MAX_DIM: usize = 64;
    pub const MAX_GROUP: usize = 12;
}

impl FromStr for Profile {
    type Err = Error;

    /// Comma-separated `key=value` pairs, keys `n`, `max_dim` and `group`
    /// (`none` or `zM`). Omitted keys take their defaults.
    fn from_str(s: &str) -> Result<Self> {
        let mut p = Profile::default();
        let mut seen: Vec<&str> = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("profile entry '{item}' is not key=value")))?;
            if seen.contains(&key.trim()) {
                return Err(Error::Parse(format!("profile key '{}' given twice", key.trim())));
            }
            seen.push(key.trim());
            let number = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("profile value '{v}' for '{key}' is not a count")))
            };
            match key.trim() {
                "n" => p.n = number(value)?,
                "max_dim" => p.max_dim = number(value)?,
                "group" => {
                    let v = value.trim();
                    p.group = if v == "none" || v == "z1" {
                        None
                    } else if let Some(m) = v.strip_prefix('z').or_else(|| v.strip_prefix('Z')) {
                        Some(number(m)?)
                    } else {
                        return Err(Error::Parse(format!("unknown group '{v}', expected none or zM")));
                    };
                }
                other => return Err(Error::Parse(format!("unknown profile key '{other}'"))),
            }
        }
        if p.n % 2 == 1 || p.n > Profile::MAX_N {
            return Err(Error::Parse(format!("profile n = {} must be even and at most {}", p.n, Profile::MAX_N)));
        }
        if p.max_dim == 0 || p.max_dim > Profile::MAX_DIM {
            return Err(Error::Parse(format!("profile max_dim must lie in 1..={}", Profile::MAX_DIM)));
        }
        if let Some(m) = p.group {
            if !(2..=Profile::MAX_GROUP).contains(&m) {
                return Err(Error::Parse(format!("cyclic group order must lie in 2..={}", Profile::MAX_GROUP)));
            }
        }
        Ok(p)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={},max_dim={}", self.n, self.max_dim)?;
        match self.group {
            Some(m) => write!(f, ",group=z{m}"),
            None => write!(f, ",group=none"),
        }
    }
}

pub fn random_gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> CMatrix {
    let g = random_gaussian(rng, d, d);
    (&g + g.adjoint()).map(|z| z * 0.5)
}

pub fn random_unitary(rng: &mut impl Rng, d: usize) -> CMatrix {
    exp_i_hermitian(&random_hermitian(rng, d)).expect("finite Hermitian input")
}

/// `U diag(s) V` with singular values in `[0.5, 2]`.
fn well_conditioned(rng: &mut impl Rng, d: usize) -> CMatrix {
    let s = DVector::from_fn(d, |_, _| Complex64::new(rng.random_range(0.5..2.0), 0.0));
    random_unitary(rng, d) * CMatrix::from_diagonal(&s) * random_unitary(rng, d)
}

/// A random self-adjoint family `R_j: E_{shift−j} → E_j` for `j = 0..=top`.
pub fn random_self_adjoint_family(rng: &mut impl Rng, dims: &[usize], shift: usize, scale: f64) -> Vec<CMatrix> {
    let top = dims.len() - 1;
    let dim = |k: isize| if k >= 0 && (k as usize) <= top { dims[k as usize] } else { 0 };
    let mut r: Vec<CMatrix> = (0..=top)
        .map(|j| zeros(dims[j], dim(shift as isize - j as isize)))
        .collect();
    for j in 0..=top {
        let partner = shift as isize - j as isize;
        if partner < 0 || partner as usize > top || (partner as usize) < j {
            continue;
        }
        let partner = partner as usize;
        if partner == j {
            r[j] = random_hermitian(rng, dims[j]).map(|z| z * scale);
        } else {
            r[j] = random_gaussian(rng, dims[j], dims[partner]).map(|z| z * scale);
            r[partner] = r[j].adjoint();
        }
    }
    r
}

/// A chain complex of top degree `m` with random ranks: in degree `k` the
/// first `r_{k+1}` coordinates span the image of `b_{k+1}` and the next
/// `r_k` are mapped isomorphically onto the first `r_k` of degree `k − 1`.
fn random_chain_complex(rng: &mut impl Rng, dims: &[usize]) -> ChainComplex {
    let m = dims.len() - 1;
    let mut ranks = vec![0usize; m + 2];
    for k in (1..=m).rev() {
        let room = dims[k].saturating_sub(ranks[k + 1]).min(dims[k - 1]);
        ranks[k] = rng.random_range(0..=room);
    }
    let b = (1..=m)
        .map(|k| {
            let mut bk = zeros(dims[k - 1], dims[k]);
            let r = ranks[k];
            if r > 0 {
                bk.view_mut((0, ranks[k + 1]), (r, r)).copy_from(&well_conditioned(rng, r));
            }
            bk
        })
        .collect();
    ChainComplex::new(dims.to_vec(), b).expect("consistent shapes")
}

/// Tensor with a representation of dimension `r`: `b ⊗ 1`, `S ⊗ 1`,
/// `ρ(g) = 1 ⊗ σ(g)`.
fn tensor(hp: &HilbertPoincareComplex, group: &Arc<FiniteGroup>, sigma: &[CMatrix]) -> HilbertPoincareComplex {
    let r = sigma[0].nrows();
    let one = identity(r);
    let n = hp.top_degree();
    let dims: Vec<usize> = hp.dims().iter().map(|d| d * r).collect();
    let b = (1..=n).map(|k| hp.complex().differential(k).kronecker(&one)).collect();
    let s = (0..=n).map(|k| hp.duality().block(k).kronecker(&one)).collect();
    let matrices = sigma
        .iter()
        .map(|sg| hp.dims().iter().map(|&d| identity(d).kronecker(sg)).collect())
        .collect();
    let action = GroupAction::new(group.clone(), matrices, &dims).expect("tensor action shapes");
    HilbertPoincareComplex::new(
        ChainComplex::new(dims.clone(), b).expect("tensor shapes"),
        DualityOperator::new(&dims, s).expect("tensor shapes"),
        Some(action),
    )
    .expect("tensor shapes")
}

/// Either a character `g ↦ ω^{jg}` or the regular representation of `ℤ/m`.
fn random_representation(rng: &mut impl Rng, m: usize) -> Vec<CMatrix> {
    if rng.random_bool(0.5) {
        let j = rng.random_range(0..m);
        (0..m)
            .map(|g| {
                let angle = 2.0 * std::f64::consts::PI * ((j * g) % m) as f64 / m as f64;
                CMatrix::from_element(1, 1, Complex64::from_polar(1.0, angle))
            })
            .collect()
    } else {
        (0..m)
            .map(|g| {
                let mut p = zeros(m, m);
                for x in 0..m {
                    p[((x + g) % m, x)] = ONE;
                }
                p
            })
            .collect()
    }
}

fn form_piece(rng: &mut impl Rng, n: usize) -> HilbertPoincareComplex {
    let mut dims = vec![0; n + 1];
    dims[n / 2] = 1;
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let blocks = (0..=n)
        .map(|k| {
            if k == n / 2 {
                CMatrix::from_element(1, 1, Complex64::new(sign, 0.0))
            } else {
                zeros(dims[k], dims[n - k])
            }
        })
        .collect();
    HilbertPoincareComplex::new(
        ChainComplex::zero(dims.clone()).unwrap(),
        DualityOperator::new(&dims, blocks).unwrap(),
        None,
    )
    .unwrap()
}

fn hyperbolic_piece(rng: &mut impl Rng, n: usize) -> HilbertPoincareComplex {
    let m = n - 1;
    let dims: Vec<usize> = (0..=m).map(|_| rng.random_range(0..=2)).collect();
    let c = random_chain_complex(rng, &dims);
    let s1 = if rng.random_bool(0.3) {
        (0..=m).map(|k| zeros(dims[k], dims[m - k])).collect::<Vec<_>>()
    } else {
        let zero = HilbertPoincareComplex::new(c.clone(), DualityOperator::zero(&dims), None).unwrap();
        let r = random_self_adjoint_family(rng, &dims, m + 2, 1.0);
        perturb_duality(&zero, &r, DEFAULT_TOL)
            .expect("self-adjoint family")
            .duality()
            .blocks()
            .to_vec()
    };
    hyperbolic(&c, &s1, DEFAULT_TOL).expect("preconditions hold by construction")
}

/// A random valid Hilbert–Poincaré complex: a direct sum of form and
/// hyperbolic pieces (tensored with characters or the regular
/// representation when a group is requested), then twisted by random
/// degreewise unitaries and perturbed by `S ↦ S + bRb*` with an averaged
/// self-adjoint `R`.
pub fn generate(seed: u64, profile: &Profile) -> HilbertPoincareComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = profile.n;
    let group = profile.group.map(|m| Arc::new(FiniteGroup::cyclic(m).expect("valid order")));
    let target = rng.random_range(1..=6);
    let mut used = vec![0usize; n + 1];
    let mut pieces: Vec<HilbertPoincareComplex> = Vec::new();
    for _ in 0..4 * target {
        if pieces.len() == target {
            break;
        }
        let base = if n >= 2 && rng.random_bool(0.5) {
            hyperbolic_piece(&mut rng, n)
        } else {
            form_piece(&mut rng, n)
        };
        let piece = match &group {
            Some(g) => tensor(&base, g, &random_representation(&mut rng, g.order())),
            None => base,
        };
        if piece.dims().iter().all(|&d| d == 0) {
            continue;
        }
        if piece.dims().iter().zip(&used).all(|(d, u)| d + u <= profile.max_dim) {
            for (u, d) in used.iter_mut().zip(piece.dims()) {
                *u += d;
            }
            pieces.push(piece);
        }
    }
    if pieces.is_empty() {
        let base = form_piece(&mut rng, n);
        pieces.push(match &group {
            Some(g) => {
                let trivial = vec![CMatrix::from_element(1, 1, ONE); g.order()];
                tensor(&base, g, &trivial)
            }
            None => base,
        });
    }
    let mut hp = pieces[0].clone();
    for p in &pieces[1..] {
        hp = direct_sum(&hp, p).expect("pieces share n and group");
    }
    if n == 0 {
        return hp;
    }
    let u: Vec<CMatrix> = hp.dims().iter().map(|&d| random_unitary(&mut rng, d)).collect();
    hp = twist(&hp, &u, DEFAULT_TOL).expect("random unitaries");
    let r = random_self_adjoint_family(&mut rng, hp.dims(), n + 2, 0.5);
    let r = match hp.action() {
        None => r,
        Some(a) => average_family(a, &r, n + 2),
    };
    perturb_duality(&hp, &r, DEFAULT_TOL).expect("averaged family stays self-adjoint")
}

/// `R̄_j = |G|⁻¹ Σ_g ρ_j(g) R_j ρ_{shift−j}(g)*`.
fn average_family(a: &GroupAction, r: &[CMatrix], shift: usize) -> Vec<CMatrix> {
    let order = a.group().order() as f64;
    let top = r.len() - 1;
    r.iter()
        .enumerate()
        .map(|(j, rj)| {
            let partner = shift as isize - j as isize;
            if partner < 0 || partner as usize > top {
                return rj.clone();
            }
            let mut sum = zeros(rj.nrows(), rj.ncols());
            for g in 0..a.group().order() {
                sum += a.matrix(g, j) * rj * a.matrix(g, partner as usize).adjoint();
            }
            sum.map(|z| z / order)
        })
        .collect()
}

/// A random valid complex with boundary: the cylinder on a generated
/// complex (no group), twisted by a unitary preserving the boundary split
/// and perturbed by `S ↦ S + bRb*`.
pub fn generate_with_boundary(seed: u64, profile: &Profile) -> ComplexWithBoundary {
    let base = generate(seed, &Profile { group: None, ..profile.clone() });
    let cwb = cylinder(&base).expect("cylinder of a valid complex");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let dims = cwb.complex().dims().to_vec();
    let u: Vec<CMatrix> = dims
        .iter()
        .zip(cwb.boundary())
        .map(|(&d, idx)| {
            let e0 = idx.len();
            let mut uk = zeros(d, d);
            uk.view_mut((0, 0), (e0, e0)).copy_from(&random_unitary(&mut rng, e0));
            uk.view_mut((e0, e0), (d - e0, d - e0)).copy_from(&random_unitary(&mut rng, d - e0));
            uk
        })
        .collect();
    let hp = HilbertPoincareComplex::new(cwb.complex().clone(), cwb.duality().clone(), None).unwrap();
    let hp = twist(&hp, &u, DEFAULT_TOL).expect("random unitaries");
    let m = hp.top_degree();
    let r = random_self_adjoint_family(&mut rng, &dims, m + 2, 0.5);
    let hp = perturb_duality(&hp, &r, DEFAULT_TOL).expect("self-adjoint family");
    ComplexWithBoundary::new(hp.complex().clone(), hp.duality().clone(), cwb.boundary().to_vec())
        .expect("split is unchanged")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bordism::{boundary_complex, verify_boundary_conditions};
    use crate::hpcomplex::verify_duality;

    #[test]
    fn profile_round_trip() {
        let p: Profile = "n=4,max_dim=8,group=z3".parse().unwrap();
        assert_eq!(p, Profile { n: 4, max_dim: 8, group: Some(3) });
        assert_eq!(p.to_string().parse::<Profile>().unwrap(), p);
        assert_eq!("".parse::<Profile>().unwrap(), Profile::default());
        for bad in ["n=3", "n", "max_dim=0", "group=s3", "colour=red", "n=-2", "group=z1000"] {
            assert!(bad.parse::<Profile>().is_err(), "{bad}");
        }
    }

    #[test]
    fn deterministic() {
        let p = Profile { n: 2, max_dim: 6, group: Some(2) };
        let a = generate(11, &p);
        let b = generate(11, &p);
        assert_eq!(a.total_b(), b.total_b());
        assert_eq!(a.total_s(), b.total_s());
    }

    #[test]
    fn n_zero_is_a_diagonal_form() {
        for seed in 0..20 {
            let hp = generate(seed, &Profile { n: 0, max_dim: 3, group: None });
            let s = hp.duality().block(0);
            assert!(s.nrows() <= 3);
            assert!(s.iter().enumerate().all(|(i, z)| i % (s.nrows() + 1) == 0 || *z == Complex64::new(0.0, 0.0)));
            assert!(s.diagonal().iter().all(|z| (z.norm() - 1.0).abs() < 1e-15 && z.im == 0.0));
        }
    }

    #[test]
    fn generated_instances_are_valid() {
        for seed in 0..30 {
            for group in [None, Some(3)] {
                let p = Profile { n: 2 * (seed as usize % 3), max_dim: 8, group };
                let hp = generate(seed, &p);
                assert!(hp.dims().iter().all(|&d| d <= 8));
                let report = verify_duality(&hp, 1e-9).unwrap();
                assert!(report.passed, "seed {seed}: {report:?}");
            }
        }
    }

    #[test]
    fn generated_boundaries_are_valid() {
        for seed in 0..20 {
            let cwb = generate_with_boundary(seed, &Profile { n: 2 * (seed as usize % 3), max_dim: 6, group: None });
            assert!(verify_boundary_conditions(&cwb, 1e-9).unwrap().passed);
            assert!(boundary_complex(&cwb, 1e-9).unwrap().formula_residual <= 1e-9);
        }
    }
}
