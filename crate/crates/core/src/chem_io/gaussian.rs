//! Closed-form integrals over contracted s-type Gaussians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::MolecularIntegrals;
use crate::error::{Error, Result};
use crate::linalg::EriTensor;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive<T> {
    /// Gaussian exponent, 1/bohr².
    pub exponent: T,
    pub coefficient: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom<T> {
    pub charge: u32,
    /// Position in bohr.
    pub position: [T; 3],
    /// One contracted s function per atom.
    pub primitives: Vec<Primitive<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianGeometry<T> {
    pub atoms: Vec<Atom<T>>,
    /// Net molecular charge; electrons = sum(Z) - charge.
    #[serde(default)]
    pub net_charge: i32,
}

/// STO-3G contraction for hydrogen (zeta = 1.24).
pub fn sto3g_hydrogen<T: Real>() -> Vec<Primitive<T>> {
    [
        (3.425_250_91, 0.154_328_97),
        (0.623_913_73, 0.535_328_14),
        (0.168_855_40, 0.444_634_54),
    ]
    .into_iter()
    .map(|(a, d)| Primitive {
        exponent: T::lit(a),
        coefficient: T::lit(d),
    })
    .collect()
}

/// Linear chain of `n` hydrogen atoms along z with the given bond lengths
/// (bohr); `bonds` is cycled if shorter than `n - 1`.
pub fn hydrogen_chain<T: Real>(n: usize, bonds: &[T]) -> GaussianGeometry<T> {
    let mut z = T::zero();
    let mut atoms = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            z += bonds[(i - 1) % bonds.len()];
        }
        atoms.push(Atom {
            charge: 1,
            position: [T::zero(), T::zero(), z],
            primitives: sto3g_hydrogen(),
        });
    }
    GaussianGeometry {
        atoms,
        net_charge: 0,
    }
}

impl<T: Real> GaussianGeometry<T> {
    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::invalid("geometry has no atoms"));
        }
        for (i, atom) in self.atoms.iter().enumerate() {
            if atom.primitives.is_empty() {
                return Err(Error::invalid(format!("atom {i} has no primitives")));
            }
            if atom
                .primitives
                .iter()
                .any(|p| !(p.exponent > T::zero()) || !p.coefficient.is_finite())
            {
                return Err(Error::invalid(format!(
                    "atom {i} has a non-positive exponent"
                )));
            }
            if atom.position.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!(
                    "atom {i} has a non-finite position"
                )));
            }
        }
        Ok(())
    }

    pub fn n_electrons(&self) -> i64 {
        self.atoms.iter().map(|a| a.charge as i64).sum::<i64>() - self.net_charge as i64
    }

    pub fn translated(&self, shift: [T; 3]) -> Self {
        let mut g = self.clone();
        for a in &mut g.atoms {
            for k in 0..3 {
                a.position[k] += shift[k];
            }
        }
        g
    }
}

fn dist2<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    (0..3).fold(T::zero(), |acc, k| acc + (a[k] - b[k]) * (a[k] - b[k]))
}

/// Boys function of order zero.
pub(crate) fn boys0<T: Real>(x: T) -> T {
    if x < T::lit(1e-6) {
        T::one() - x / T::lit(3.0) + x * x / T::lit(10.0)
    } else {
        let s = x.sqrt();
        T::lit(0.5) * (T::pi() / x).sqrt() * s.erf()
    }
}

/// Flat primitive list with per-primitive normalization folded into the coefficient.
struct Shell<T> {
    center: [T; 3],
    prims: Vec<(T, T)>,
}

fn build_shells<T: Real>(g: &GaussianGeometry<T>) -> Vec<Shell<T>> {
    g.atoms
        .iter()
        .map(|a| {
            let prims = a
                .primitives
                .iter()
                .map(|p| {
                    let norm = (T::lit(2.0) * p.exponent / T::pi()).powf(T::lit(0.75));
                    (p.exponent, p.coefficient * norm)
                })
                .collect();
            Shell {
                center: a.position,
                prims,
            }
        })
        .collect()
}

fn overlap_prim<T: Real>(a: T, b: T, r2: T) -> T {
    let p = a + b;
    (T::pi() / p).powf(T::lit(1.5)) * (-(a * b / p) * r2).exp()
}

fn kinetic_prim<T: Real>(a: T, b: T, r2: T) -> T {
    let p = a + b;
    let mu = a * b / p;
    mu * (T::lit(3.0) - T::lit(2.0) * mu * r2) * overlap_prim(a, b, r2)
}

fn center<T: Real>(a: T, ra: &[T; 3], b: T, rb: &[T; 3]) -> [T; 3] {
    let p = a + b;
    [0, 1, 2].map(|k| (a * ra[k] + b * rb[k]) / p)
}

fn attraction_prim<T: Real>(a: T, ra: &[T; 3], b: T, rb: &[T; 3], z: T, rc: &[T; 3]) -> T {
    let p = a + b;
    let pc = center(a, ra, b, rb);
    -z * T::two_pi() / p * (-(a * b / p) * dist2(ra, rb)).exp() * boys0(p * dist2(&pc, rc))
}

#[allow(clippy::too_many_arguments)]
fn eri_prim<T: Real>(
    a: T,
    ra: &[T; 3],
    b: T,
    rb: &[T; 3],
    c: T,
    rc: &[T; 3],
    d: T,
    rd: &[T; 3],
) -> T {
    let p = a + b;
    let q = c + d;
    let rp = center(a, ra, b, rb);
    let rq = center(c, rc, d, rd);
    let pref = T::lit(2.0) * T::pi().powf(T::lit(2.5)) / (p * q * (p + q).sqrt());
    pref * (-(a * b / p) * dist2(ra, rb) - (c * d / q) * dist2(rc, rd)).exp()
        * boys0(p * q / (p + q) * dist2(&rp, &rq))
}

/// Overlap, core Hamiltonian, and ERIs for a geometry of contracted
/// s-type Gaussians, one basis function per atom.
pub fn s_orbital_integrals<T: Real>(g: &GaussianGeometry<T>) -> Result<MolecularIntegrals<T>> {
    g.validate()?;
    let n_el = g.n_electrons();
    if n_el < 2 || n_el % 2 != 0 {
        return Err(Error::invalid(format!(
            "need a positive even number of electrons, geometry has {n_el}"
        )));
    }
    let n = g.atoms.len();
    let mut e_nuclear = T::zero();
    for i in 0..n {
        for j in 0..i {
            let (ai, aj) = (&g.atoms[i], &g.atoms[j]);
            let r = dist2(&ai.position, &aj.position).sqrt();
            let zz = T::from_u32(ai.charge * aj.charge).unwrap();
            if r == T::zero() {
                if zz != T::zero() {
                    return Err(Error::invalid(format!("atoms {j} and {i} coincide")));
                }
                continue;
            }
            e_nuclear += zz / r;
        }
    }

    let mut shells = build_shells(g);
    // contracted normalization: S_ii = 1
    for sh in &mut shells {
        let mut s = T::zero();
        for &(a, ca) in &sh.prims {
            for &(b, cb) in &sh.prims {
                s += ca * cb * overlap_prim(a, b, T::zero());
            }
        }
        let f = T::one() / s.sqrt();
        for p in &mut sh.prims {
            p.1 *= f;
        }
    }

    let mut s = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (si, sj) = (&shells[i], &shells[j]);
            let r2 = dist2(&si.center, &sj.center);
            let mut ov = T::zero();
            let mut hk = T::zero();
            for &(a, ca) in &si.prims {
                for &(b, cb) in &sj.prims {
                    let cc = ca * cb;
                    ov += cc * overlap_prim(a, b, r2);
                    hk += cc * kinetic_prim(a, b, r2);
                    for atom in &g.atoms {
                        let z = T::from_u32(atom.charge).unwrap();
                        hk += cc * attraction_prim(a, &si.center, b, &sj.center, z, &atom.position);
                    }
                }
            }
            s[(i, j)] = ov;
            s[(j, i)] = ov;
            h[(i, j)] = hk;
            h[(j, i)] = hk;
        }
    }
    for i in 0..n {
        s[(i, i)] = T::one();
    }

    let mut eri = EriTensor::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let ij = i * (i + 1) / 2 + j;
            for k in 0..n {
                for l in 0..=k {
                    if k * (k + 1) / 2 + l > ij {
                        continue;
                    }
                    let (si, sj, sk, sl) = (&shells[i], &shells[j], &shells[k], &shells[l]);
                    let mut v = T::zero();
                    for &(a, ca) in &si.prims {
                        for &(b, cb) in &sj.prims {
                            for &(c, cc) in &sk.prims {
                                for &(d, cd) in &sl.prims {
                                    v += ca
                                        * cb
                                        * cc
                                        * cd
                                        * eri_prim(
                                            a, &si.center, b, &sj.center, c, &sk.center, d,
                                            &sl.center,
                                        );
                                }
                            }
                        }
                    }
                    eri.set_sym(i, j, k, l, v);
                }
            }
        }
    }

    Ok(MolecularIntegrals {
        n_orbitals: n,
        n_electrons: n_el as usize,
        overlap: s,
        h_core: h,
        eri,
        e_nuclear,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen;

    fn h2(r: f64) -> GaussianGeometry<f64> {
        hydrogen_chain(2, &[r])
    }

    #[test]
    fn single_atom_is_normalized() {
        let mut g = hydrogen_chain::<f64>(1, &[1.0]);
        g.net_charge = -1;
        let m = s_orbital_integrals(&g).unwrap();
        assert!((m.overlap[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn h2_overlap_matches_known_value() {
        let m = s_orbital_integrals(&h2(1.4)).unwrap();
        assert!((m.overlap[(0, 1)] - 0.6593).abs() < 1e-3);
        assert!((m.e_nuclear - 1.0 / 1.4).abs() < 1e-14);
    }

    #[test]
    fn distant_atoms_decouple() {
        let m = s_orbital_integrals(&h2(1e6)).unwrap();
        assert!(m.overlap[(0, 1)].abs() < 1e-10);
        assert!(m.eri.get(0, 1, 0, 1).abs() < 1e-10);
        assert!(m.eri.get(0, 0, 0, 1).abs() < 1e-10);
    }

    #[test]
    fn coincident_nuclei_rejected() {
        assert!(s_orbital_integrals(&h2(0.0)).is_err());
    }

    #[test]
    fn boys_branches_agree_near_threshold() {
        let below = boys0(0.999_999e-6_f64);
        let above = boys0(1.000_001e-6_f64);
        assert!((below - above).abs() < 1e-12);
        assert!((boys0(0.0_f64) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn chain_overlap_positive_definite_and_eri_symmetric() {
        for r in [0.5, 1.0, 1.4, 2.5] {
            let m = s_orbital_integrals(&hydrogen_chain::<f64>(4, &[r])).unwrap();
            let (w, _) = sym_eigen(&m.overlap);
            assert!(w[0] > 0.0);
            assert_eq!(m.eri.symmetry_defect(), 0.0);
        }
    }

    #[test]
    fn f32_path_runs() {
        let m = s_orbital_integrals(&hydrogen_chain::<f32>(2, &[1.4])).unwrap();
        assert!((m.overlap[(0, 1)] - 0.6593).abs() < 1e-3);
    }
}
