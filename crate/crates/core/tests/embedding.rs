use nalgebra::DMatrix;
use proptest::prelude::*;
use qfp_core::chem_io::{hydrogen_chain, s_orbital_integrals, MolecularIntegrals};
use qfp_core::embedding::*;
use qfp_core::fci::{hamiltonian_matrix, DeterminantBasis};
use qfp_core::linalg::{max_abs, sym_eigen, EriTensor};
use qfp_core::mean_field::{lowdin_orthonormalize, scf_solve, MeanFieldSolution, ScfOptions};

fn chain(n: usize, r: f64) -> (MolecularIntegrals<f64>, MeanFieldSolution<f64>) {
    let m = s_orbital_integrals(&hydrogen_chain(n, &[r])).unwrap();
    let mf = scf_solve(&m, &ScfOptions::default()).unwrap();
    (m, mf)
}

fn sector_spectrum(h: &DMatrix<f64>, eri: &EriTensor<f64>, e0: f64, n_elec: usize) -> Vec<f64> {
    let basis = DeterminantBasis::number_sector(2 * h.nrows(), n_elec);
    let mat = hamiltonian_matrix(h, eri, e0, &basis).unwrap();
    let (w, _) = sym_eigen(&mat);
    w.iter().copied().collect()
}

/// Two electrons of opposite spin in two orthonormal orbitals, written out
/// as a product basis |a>_alpha |b>_beta with no antisymmetry bookkeeping.
fn two_level_ci(h: &DMatrix<f64>, eri: &EriTensor<f64>, e0: f64) -> f64 {
    let d = [(0, 0), (0, 1), (1, 0), (1, 1)];
    let mut m = DMatrix::zeros(4, 4);
    for (i, &(a1, b1)) in d.iter().enumerate() {
        for (j, &(a2, b2)) in d.iter().enumerate() {
            let mut v = 0.0;
            if b1 == b2 {
                v += h[(a1, a2)];
            }
            if a1 == a2 {
                v += h[(b1, b2)];
            }
            v += eri.get(a1, a2, b1, b2);
            if i == j {
                v += e0;
            }
            m[(i, j)] = v;
        }
    }
    let (w, _) = sym_eigen(&m);
    w[0]
}

#[test]
fn h2_active_space_matches_full_ci() {
    let (m, mf) = chain(2, 1.4);
    let eh = homo_lumo_active_space(&m, &mf, 2, 2).unwrap();
    let (e, _, _) = eh.ground_state().unwrap();
    let oracle = two_level_ci(&eh.h_eff, &eh.eri_active, eh.e_core);
    assert!((e - oracle).abs() < 1e-10, "{e} vs {oracle}");
    let x = lowdin_orthonormalize(&m.overlap).unwrap();
    let loc = m.transform(&x);
    let full = sector_spectrum(&loc.h_core, &loc.eri, loc.e_nuclear, 2)[0];
    assert!((e - full).abs() < 1e-10);
    assert!((e - (-1.137_275_943_6)).abs() < 1e-6);
}

#[test]
fn full_window_is_the_mo_hamiltonian() {
    let (m, mf) = chain(4, 1.4);
    let eh = homo_lumo_active_space(&m, &mf, 4, 4).unwrap();
    let mo = m.transform(&mf.coefficients);
    assert!(max_abs(&(&eh.h_eff - &mo.h_core)) < 1e-12);
    assert!((eh.e_core - m.e_nuclear).abs() < 1e-12);
    assert_eq!(eh.provenance, Provenance::ActiveSpace);
}

#[test]
fn zero_eri_window_keeps_one_body_part() {
    let (mut m, _) = chain(4, 1.4);
    m.eri = EriTensor::zeros(4);
    let mf = scf_solve(&m, &ScfOptions::default()).unwrap();
    let eh = homo_lumo_active_space(&m, &mf, 2, 2).unwrap();
    let mo = m.transform(&mf.coefficients);
    assert!(max_abs(&(&eh.h_eff - mo.h_core.view((1, 1), (2, 2)))) < 1e-12);
}

#[test]
fn whole_system_fragment_reproduces_spectrum() {
    let (m, mf) = chain(4, 1.4);
    let frag = FragmentSpec::new(vec![0, 1, 2, 3], "all");
    let opts = DmetOptions {
        fit_mu: false,
        ..DmetOptions::default()
    };
    let emb = dmet_embed(&m, &mf, &frag, &opts).unwrap();
    assert_eq!(emb.cluster_basis.n_bath(), 0);
    assert_eq!(emb.cluster_basis.env_occupied.ncols(), 0);
    let eh = &emb.hamiltonian;
    let got = sector_spectrum(&eh.h_eff, &eh.eri_active, eh.e_core, 4);
    let loc = &emb.integrals_loc;
    let want = sector_spectrum(&loc.h_core, &loc.eri, loc.e_nuclear, 4);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).abs() < 1e-10);
    }
    // the fitted chemical potential stays at zero when the filling cannot move
    let fitted = dmet_embed(&m, &mf, &frag, &DmetOptions::default()).unwrap();
    assert_eq!(fitted.hamiltonian.mu, 0.0);
}

#[test]
fn non_interacting_embedding_is_exact() {
    for frag in [vec![0], vec![0, 1], vec![1, 2]] {
        let (mut m, _) = chain(6, 1.5);
        m.eri = EriTensor::zeros(6);
        let mf = scf_solve(&m, &ScfOptions::default()).unwrap();
        let opts = DmetOptions {
            fit_mu: false,
            ..DmetOptions::default()
        };
        let emb = dmet_embed(&m, &mf, &FragmentSpec::new(frag.clone(), "f"), &opts).unwrap();
        let (e, _, _) = emb.hamiltonian.ground_state().unwrap();
        assert!(
            (e - mf.e_total).abs() < 1e-8,
            "{frag:?}: {e} vs {}",
            mf.e_total
        );
    }
}

#[test]
fn single_site_fragment_has_one_bath_orbital() {
    let (m, mf) = chain(4, 1.4);
    let emb = dmet_embed(
        &m,
        &mf,
        &FragmentSpec::new(vec![0], "h0"),
        &DmetOptions {
            fit_mu: false,
            ..DmetOptions::default()
        },
    )
    .unwrap();
    assert_eq!(emb.cluster_basis.n_bath(), 1);
    let c = emb.cluster_basis.cluster();
    let n_c = (c.transpose() * &emb.density_loc * &c).trace();
    assert!((n_c - n_c.round()).abs() < 1e-8, "{n_c}");
    assert_eq!(emb.hamiltonian.n_active_electrons as f64, n_c.round());
    let all = emb.cluster_basis.all_columns();
    assert!(max_abs(&(all.transpose() * &all - DMatrix::identity(4, 4))) < 1e-10);
}

#[test]
fn decoupled_fragment_has_no_bath() {
    let mut d = DMatrix::zeros(4, 4);
    d[(0, 0)] = 2.0;
    d[(1, 1)] = 1.0;
    d[(2, 2)] = 1.0;
    d[(1, 2)] = 1.0;
    d[(2, 1)] = 1.0;
    let cb = dmet_cluster_basis(&d, &FragmentSpec::new(vec![0], "f"), DEFAULT_BATH_TOL).unwrap();
    assert_eq!(cb.n_bath(), 0);
}

#[test]
fn mu_shift_is_linear_on_fragment_diagonal() {
    let (m, mf) = chain(4, 1.4);
    let x = lowdin_orthonormalize(&m.overlap).unwrap();
    let m_loc = m.transform(&x);
    let sx = &m.overlap * &x;
    let d_loc = sx.transpose() * &mf.density * &sx;
    let cb = dmet_cluster_basis(
        &d_loc,
        &FragmentSpec::new(vec![0, 1], "f"),
        DEFAULT_BATH_TOL,
    )
    .unwrap();
    let h0 = dmet_hamiltonian(&m_loc, &cb, 0.0, ExchangeFactor::Half).unwrap();
    let h1 = dmet_hamiltonian(&m_loc, &cb, 0.37, ExchangeFactor::Half).unwrap();
    let mask = DMatrix::from_fn(4, 4, |i, j| {
        if i == j && h0.fragment_mask[i] {
            1.0
        } else {
            0.0
        }
    });
    assert!(max_abs(&(&h1.h_eff - &h0.h_eff + mask * 0.37)) < 1e-14);
    assert_eq!(h1.mu, 0.37);
    assert_eq!(h0.fragment_mask.iter().filter(|&&b| b).count(), 2);
}

#[test]
fn h4_mu_fit_hits_fragment_filling() {
    let (m, mf) = chain(4, 1.4);
    let emb = dmet_embed(
        &m,
        &mf,
        &FragmentSpec::new(vec![0, 1], "h01"),
        &DmetOptions::default(),
    )
    .unwrap();
    let got = fragment_filling(&emb.hamiltonian).unwrap();
    assert!((got - emb.target_filling).abs() < 1e-6);
    assert_eq!(emb.hamiltonian.n_active_orbitals, 4);
    assert_eq!(emb.hamiltonian.n_active_electrons, 4);
    assert_eq!(emb.hamiltonian.provenance, Provenance::Dmet);
}

#[test]
fn symmetric_dimer_needs_no_mu() {
    let (mut m, _) = chain(2, 1.4);
    m.eri = EriTensor::zeros(2);
    let mf = scf_solve(&m, &ScfOptions::default()).unwrap();
    let emb = dmet_embed(
        &m,
        &mf,
        &FragmentSpec::new(vec![0], "h0"),
        &DmetOptions::default(),
    )
    .unwrap();
    assert!(emb.hamiltonian.mu.abs() < 1e-6);
}

#[test]
fn linear_count_root() {
    let fit =
        fit_chemical_potential(|mu: f64| Ok(3.0 + 2.0 * mu), 2.2, 1e-10, (-2.0, 2.0)).unwrap();
    assert!((fit.mu + 0.4).abs() < 1e-10);
    assert!(fit_chemical_potential(|_mu: f64| Ok(1.0), 2.0, 1e-10, (-2.0, 2.0)).is_err());
}

#[test]
fn cluster_reduction_orders_energies() {
    let (m, mf) = chain(6, 1.6);
    let frag = FragmentSpec::new(vec![0, 1, 2], "h012");
    let emb = dmet_embed(&m, &mf, &frag, &DmetOptions::default()).unwrap();
    let eh = &emb.hamiltonian;
    assert_eq!((eh.n_active_orbitals, eh.n_active_electrons), (6, 6));

    let same = cluster_reduce(eh, &emb.fock_cluster, 6, 6).unwrap();
    let a = sector_spectrum(&eh.h_eff, &eh.eri_active, eh.e_core, 6);
    let b = sector_spectrum(&same.h_eff, &same.eri_active, same.e_core, 6);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
    assert_eq!(same.provenance, Provenance::ClusterReduced);

    let full = eh.ground_state().unwrap().0;
    let e4 = cluster_reduce(eh, &emb.fock_cluster, 4, 4)
        .unwrap()
        .ground_state()
        .unwrap()
        .0;
    let e2 = cluster_reduce(eh, &emb.fock_cluster, 2, 2)
        .unwrap()
        .ground_state()
        .unwrap()
        .0;
    assert!(e2 >= e4 - 1e-10 && e4 >= full - 1e-10, "{e2} {e4} {full}");
}

#[test]
fn embedded_hamiltonians_are_hermitian() {
    let (m, mf) = chain(6, 1.8);
    for frag in [vec![0], vec![0, 1], vec![2, 3]] {
        let emb = dmet_embed(
            &m,
            &mf,
            &FragmentSpec::new(frag, "f"),
            &DmetOptions::default(),
        )
        .unwrap();
        let eh = &emb.hamiltonian;
        assert!(max_abs(&(&eh.h_eff - eh.h_eff.transpose())) < 1e-12);
        assert!(eh.eri_active.symmetry_defect() < 1e-12);
        assert!(eh.n_active_electrons % 2 == 0);
        assert!(emb.cluster_basis.n_bath() <= emb.cluster_basis.n_fragment());
    }
}

#[test]
fn dmet_hamiltonian_exports_through_fcidump() {
    let (m, mf) = chain(4, 1.4);
    let emb = dmet_embed(
        &m,
        &mf,
        &FragmentSpec::new(vec![0, 1], "h01"),
        &DmetOptions::default(),
    )
    .unwrap();
    let eh = &emb.hamiltonian;
    let text = qfp_core::chem_io::emit_fcidump(&eh.to_integrals()).unwrap();
    let back: MolecularIntegrals<f64> = qfp_core::chem_io::parse_fcidump(&text).unwrap();
    let round = EmbeddedHamiltonian::from_integrals(&back).unwrap();
    assert!((round.ground_state().unwrap().0 - eh.ground_state().unwrap().0).abs() < 1e-10);
}

#[test]
fn bad_fragments_rejected() {
    let (m, mf) = chain(4, 1.4);
    for frag in [vec![], vec![4], vec![1, 1]] {
        assert!(dmet_embed(
            &m,
            &mf,
            &FragmentSpec::new(frag, "x"),
            &DmetOptions::default()
        )
        .is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bath_bound_and_orthonormality(r in 1.0f64..2.8, start in 0usize..3, len in 1usize..3) {
        let (m, mf) = chain(6, r);
        let frag: Vec<usize> = (start..(start + len).min(6)).collect();
        let emb = dmet_embed(&m, &mf, &FragmentSpec::new(frag, "f"), &DmetOptions { fit_mu: false, ..DmetOptions::default() }).unwrap();
        let cb = &emb.cluster_basis;
        prop_assert!(cb.n_bath() <= cb.n_fragment());
        let all = cb.all_columns();
        prop_assert!(max_abs(&(all.transpose() * &all - DMatrix::identity(6, 6))) < 1e-10);
    }
}
