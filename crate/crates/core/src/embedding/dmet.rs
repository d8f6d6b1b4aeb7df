//! Single-shot density matrix embedding in the Löwdin-localized basis.

use nalgebra::{DMatrix, DVector};

use super::{freeze_orbitals, EmbeddedHamiltonian, ExchangeFactor, FragmentSpec, Provenance};
use crate::chem_io::MolecularIntegrals;
use crate::error::{Error, Result};
use crate::fci;
use crate::linalg::sym_eigen;
use crate::mean_field::{lowdin_orthonormalize, MeanFieldSolution};
use crate::scalar::Real;

/// Singular values above this define bath orbitals.
pub const DEFAULT_BATH_TOL: f64 = 1e-6;
/// Environment eigen-occupation (of `D/2`) above which an orbital is frozen occupied.
const OCCUPIED_THRESHOLD: f64 = 0.5;
/// Allowed distance of the cluster electron count from an even integer.
const INTEGRALITY_TOL: f64 = 0.05;

/// Orthonormal column sets in the localized basis.
#[derive(Debug, Clone)]
pub struct ClusterBasis<T> {
    pub fragment: DMatrix<T>,
    pub bath: DMatrix<T>,
    pub env_occupied: DMatrix<T>,
    pub env_virtual: DMatrix<T>,
    /// Descending, only those kept as bath.
    pub bath_singular_values: Vec<T>,
    pub fragment_orbitals: Vec<usize>,
    /// Mean-field density projected onto the occupied environment orbitals.
    pub env_density: DMatrix<T>,
}

impl<T: Real> ClusterBasis<T> {
    pub fn n_fragment(&self) -> usize {
        self.fragment.ncols()
    }

    pub fn n_bath(&self) -> usize {
        self.bath.ncols()
    }

    /// `[fragment | bath]`.
    pub fn cluster(&self) -> DMatrix<T> {
        let n = self.fragment.nrows();
        let (nf, nb) = (self.n_fragment(), self.n_bath());
        let mut c = DMatrix::zeros(n, nf + nb);
        c.columns_mut(0, nf).copy_from(&self.fragment);
        c.columns_mut(nf, nb).copy_from(&self.bath);
        c
    }

    /// All columns side by side: fragment, bath, occupied and virtual environment.
    pub fn all_columns(&self) -> DMatrix<T> {
        let n = self.fragment.nrows();
        let blocks = [
            &self.fragment,
            &self.bath,
            &self.env_occupied,
            &self.env_virtual,
        ];
        let total: usize = blocks.iter().map(|b| b.ncols()).sum();
        let mut c = DMatrix::zeros(n, total);
        let mut at = 0;
        for b in blocks {
            c.columns_mut(at, b.ncols()).copy_from(b);
            at += b.ncols();
        }
        c
    }
}

fn embed_rows<T: Real>(n: usize, rows: &[usize], block: &DMatrix<T>) -> DMatrix<T> {
    let mut out = DMatrix::zeros(n, block.ncols());
    for (i, &r) in rows.iter().enumerate() {
        out.row_mut(r).copy_from(&block.row(i));
    }
    out
}

/// Fragment + bath construction from the localized spin-summed 1-RDM.
pub fn dmet_cluster_basis<T: Real>(
    d_loc: &DMatrix<T>,
    frag: &FragmentSpec,
    tol: T,
) -> Result<ClusterBasis<T>> {
    let n = d_loc.nrows();
    if !d_loc.is_square() {
        return Err(Error::Dimension("density must be square".into()));
    }
    frag.validate(n)?;
    let (occ, _) = sym_eigen(d_loc);
    let bound = T::lit(1e-6).max(tol);
    if n > 0 && (occ[0] < -bound || occ[n - 1] > T::lit(2.0) + bound) {
        return Err(Error::Embedding(format!(
            "density eigen-occupations [{}, {}] outside [0, 2]",
            occ[0],
            occ[n - 1]
        )));
    }

    let frag_idx = &frag.orbitals;
    let env_idx: Vec<usize> = (0..n).filter(|i| !frag_idx.contains(i)).collect();
    let (nf, ne) = (frag_idx.len(), env_idx.len());
    let p = d_loc * T::lit(0.5);
    let fragment = embed_rows(n, frag_idx, &DMatrix::identity(nf, nf));

    let mut bath_local = DMatrix::zeros(ne, 0);
    let mut singular = Vec::new();
    if ne > 0 {
        let block = DMatrix::from_fn(ne, nf, |i, j| p[(env_idx[i], frag_idx[j])]);
        // left singular vectors from the eigenvectors of B Bᵀ
        let bbt = &block * block.transpose();
        let (w, u) = sym_eigen(&bbt);
        let mut kept = Vec::new();
        for k in (0..ne).rev() {
            let sigma = w[k].max(T::zero()).sqrt();
            if sigma > tol * T::lit(0.5) && sigma < tol * T::lit(2.0) {
                return Err(Error::Embedding(format!(
                    "bath singular value {sigma:e} is ambiguous at cutoff {tol:e}"
                )));
            }
            if sigma > tol {
                kept.push(k);
                singular.push(sigma);
            }
        }
        if kept.len() > nf {
            return Err(Error::Embedding(format!(
                "{} bath orbitals exceed {nf} fragment orbitals",
                kept.len()
            )));
        }
        // degenerate singular values at the boundary are caught above
        let mut b = DMatrix::zeros(ne, kept.len());
        for (j, &k) in kept.iter().enumerate() {
            b.set_column(j, &u.column(k));
        }
        bath_local = b;
    }
    let nb = bath_local.ncols();

    // complement of the bath inside the environment, diagonalizing the projected RDM
    let (env_occ_local, env_virt_local) = if ne > nb {
        let proj = DMatrix::<T>::identity(ne, ne) - &bath_local * bath_local.transpose();
        let (w, v) = sym_eigen(&proj);
        let q = v.columns(ne - (ne - nb), ne - nb).into_owned();
        debug_assert!(w[nb] > T::lit(0.5));
        let p_env = DMatrix::from_fn(ne, ne, |i, j| p[(env_idx[i], env_idx[j])]);
        let (nocc, z) = sym_eigen(&(q.transpose() * p_env * &q));
        let rotated = q * z;
        let mut occ_cols = Vec::new();
        let mut virt_cols = Vec::new();
        for k in 0..rotated.ncols() {
            if nocc[k] > T::lit(OCCUPIED_THRESHOLD) {
                occ_cols.push(rotated.column(k).into_owned());
            } else {
                virt_cols.push(rotated.column(k).into_owned());
            }
        }
        let stack = |cols: Vec<DVector<T>>| {
            let mut m = DMatrix::zeros(ne, cols.len());
            for (j, c) in cols.iter().enumerate() {
                m.set_column(j, c);
            }
            m
        };
        (stack(occ_cols), stack(virt_cols))
    } else {
        (DMatrix::zeros(ne, 0), DMatrix::zeros(ne, 0))
    };

    let env_occupied = embed_rows(n, &env_idx, &env_occ_local);
    let env_virtual = embed_rows(n, &env_idx, &env_virt_local);
    let proj = &env_occupied * env_occupied.transpose();
    let env_density = &proj * d_loc * &proj;
    Ok(ClusterBasis {
        fragment,
        bath: embed_rows(n, &env_idx, &bath_local),
        env_occupied,
        env_virtual,
        bath_singular_values: singular,
        fragment_orbitals: frag_idx.clone(),
        env_density,
    })
}

/// Cluster Hamiltonian over fragment + bath with the occupied environment frozen.
pub fn dmet_hamiltonian<T: Real>(
    m_loc: &MolecularIntegrals<T>,
    cb: &ClusterBasis<T>,
    mu: T,
    exchange: ExchangeFactor,
) -> Result<EmbeddedHamiltonian<T>> {
    if !m_loc.is_orthonormal(T::lit(1e-8)) {
        return Err(Error::invalid(
            "DMET needs integrals in an orthonormal (localized) basis",
        ));
    }
    if !mu.is_finite() {
        return Err(Error::invalid("chemical potential must be finite"));
    }
    let cluster = cb.cluster();
    let nc = cluster.ncols();
    let n_env = cb.env_density.trace();
    let n_cluster = usize_to_real::<T>(m_loc.n_electrons) - n_env;
    let nearest_even = (n_cluster * T::lit(0.5)).round() * T::lit(2.0);
    if (n_cluster - nearest_even).abs() > T::lit(INTEGRALITY_TOL) || nearest_even < T::zero() {
        return Err(Error::Embedding(format!(
            "cluster holds {n_cluster} electrons, not close to an even integer"
        )));
    }
    let n_active_electrons = nearest_even.to_f64_lossy() as usize;
    if n_active_electrons > 2 * nc {
        return Err(Error::Embedding(format!(
            "{n_active_electrons} cluster electrons exceed {nc} cluster orbitals"
        )));
    }

    let (mut h_eff, eri_active, e_core) = freeze_orbitals(
        &m_loc.h_core,
        &m_loc.eri,
        m_loc.e_nuclear,
        &cb.env_density,
        &cluster,
        exchange,
    );
    let nf = cb.n_fragment();
    for r in 0..nf {
        h_eff[(r, r)] -= mu;
    }
    let eh = EmbeddedHamiltonian {
        n_active_orbitals: nc,
        n_active_electrons,
        h_eff,
        eri_active,
        e_core,
        mu,
        fragment_mask: (0..nc).map(|r| r < nf).collect(),
        provenance: Provenance::Dmet,
        orbital_energies: None,
    };
    eh.validate()?;
    Ok(eh)
}

fn usize_to_real<T: Real>(n: usize) -> T {
    crate::scalar::usize_to(n)
}

/// Fragment electron count of the cluster ground state (singlet sector).
pub fn fragment_filling<T: Real>(eh: &EmbeddedHamiltonian<T>) -> Result<T> {
    let (_, v, basis) = eh.ground_state()?;
    let rho = fci::one_rdm(&basis, &v);
    Ok((0..eh.n_active_orbitals)
        .filter(|&r| eh.fragment_mask[r])
        .fold(T::zero(), |acc, r| acc + rho[(r, r)]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuFit<T> {
    pub mu: T,
    pub count: T,
    pub iterations: usize,
}

/// Bisection for `count(mu) = n_target`. `count` must be monotone over
/// `bracket` and the endpoint values must straddle the target.
pub fn fit_chemical_potential<T: Real>(
    mut count: impl FnMut(T) -> Result<T>,
    n_target: T,
    tol: T,
    bracket: (T, T),
) -> Result<MuFit<T>> {
    const MAX_ITER: usize = 100;
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::invalid("bracket must satisfy lo < hi"));
    }
    if lo < T::zero() && T::zero() < hi {
        let c0 = count(T::zero())?;
        if (c0 - n_target).abs() < tol {
            return Ok(MuFit {
                mu: T::zero(),
                count: c0,
                iterations: 0,
            });
        }
    }
    let mut f_lo = count(lo)? - n_target;
    let mut f_hi = count(hi)? - n_target;
    let straddle_err = || Error::Bracket {
        lo: bracket.0.to_f64_lossy(),
        hi: bracket.1.to_f64_lossy(),
        target: n_target.to_f64_lossy(),
        count_lo: (f_lo + n_target).to_f64_lossy(),
        count_hi: (f_hi + n_target).to_f64_lossy(),
    };
    if f_lo.abs() < tol {
        return Ok(MuFit {
            mu: lo,
            count: f_lo + n_target,
            iterations: 0,
        });
    }
    if f_hi.abs() < tol {
        return Ok(MuFit {
            mu: hi,
            count: f_hi + n_target,
            iterations: 0,
        });
    }
    if (f_lo > T::zero()) == (f_hi > T::zero()) {
        return Err(straddle_err());
    }
    let increasing = f_hi > f_lo;
    for it in 1..=MAX_ITER {
        let mid = (lo + hi) * T::lit(0.5);
        let f_mid = count(mid)? - n_target;
        // monotonicity: the midpoint value must lie between the endpoint values
        let slack = tol;
        let (lo_v, hi_v) = if increasing {
            (f_lo, f_hi)
        } else {
            (f_hi, f_lo)
        };
        if f_mid < lo_v - slack || f_mid > hi_v + slack {
            return Err(Error::Numerical(format!(
                "count is not monotone over the bracket near mu = {mid}"
            )));
        }
        if f_mid.abs() < tol {
            return Ok(MuFit {
                mu: mid,
                count: f_mid + n_target,
                iterations: it,
            });
        }
        if (f_mid > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Err(Error::Numerical(format!(
        "chemical potential bisection did not reach tolerance {tol:e} in {MAX_ITER} iterations"
    )))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmetOptions<T> {
    pub bath_tol: T,
    pub exchange: ExchangeFactor,
    /// Fit `mu` so the fragment filling matches the mean-field value.
    pub fit_mu: bool,
    pub mu_tol: T,
    pub mu_bracket: (T, T),
}

impl<T: Real> Default for DmetOptions<T> {
    fn default() -> Self {
        Self {
            bath_tol: T::lit(DEFAULT_BATH_TOL),
            exchange: ExchangeFactor::Half,
            fit_mu: true,
            mu_tol: T::lit(1e-6),
            mu_bracket: (T::lit(-2.0), T::lit(2.0)),
        }
    }
}

/// Everything produced by one DMET embedding of a molecule.
#[derive(Debug, Clone)]
pub struct DmetEmbedding<T> {
    pub hamiltonian: EmbeddedHamiltonian<T>,
    pub cluster_basis: ClusterBasis<T>,
    /// Löwdin orthogonalizer `S^{-1/2}`.
    pub lowdin: DMatrix<T>,
    pub integrals_loc: MolecularIntegrals<T>,
    pub density_loc: DMatrix<T>,
    /// Mean-field Fock matrix projected into the cluster basis.
    pub fock_cluster: DMatrix<T>,
    /// Mean-field fragment filling used as the fitting target.
    pub target_filling: T,
    pub mu_fit: Option<MuFit<T>>,
}

/// Löwdin localization, cluster construction, and (optionally) the
/// chemical-potential fit, starting from AO integrals and a converged RHF.
pub fn dmet_embed<T: Real>(
    m: &MolecularIntegrals<T>,
    mf: &MeanFieldSolution<T>,
    frag: &FragmentSpec,
    opts: &DmetOptions<T>,
) -> Result<DmetEmbedding<T>> {
    mf.require_converged()?;
    let x = lowdin_orthonormalize(&m.overlap)?;
    let m_loc = m.transform(&x);
    let sx = &m.overlap * &x;
    let d_loc = sx.transpose() * &mf.density * &sx;
    let d_loc = (&d_loc + d_loc.transpose()) * T::lit(0.5);
    let cb = dmet_cluster_basis(&d_loc, frag, opts.bath_tol)?;
    let cluster = cb.cluster();
    let f_loc = x.transpose() * &mf.fock * &x;
    let fock_cluster = cluster.transpose() * f_loc * &cluster;
    let target: T = frag
        .orbitals
        .iter()
        .fold(T::zero(), |a, &i| a + d_loc[(i, i)]);

    let (hamiltonian, mu_fit) = if opts.fit_mu {
        let fit = fit_chemical_potential(
            |mu| fragment_filling(&dmet_hamiltonian(&m_loc, &cb, mu, opts.exchange)?),
            target,
            opts.mu_tol,
            opts.mu_bracket,
        )?;
        (
            dmet_hamiltonian(&m_loc, &cb, fit.mu, opts.exchange)?,
            Some(fit),
        )
    } else {
        (
            dmet_hamiltonian(&m_loc, &cb, T::zero(), opts.exchange)?,
            None,
        )
    };
    Ok(DmetEmbedding {
        hamiltonian,
        cluster_basis: cb,
        lowdin: x,
        integrals_loc: m_loc,
        density_loc: d_loc,
        fock_cluster: (&fock_cluster + fock_cluster.transpose()) * T::lit(0.5),
        target_filling: target,
        mu_fit,
    })
}
