use std::path::PathBuf;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qfp_core::chem_io::*;
use qfp_core::linalg::max_abs;
use qfp_core::mean_field::{lowdin_orthonormalize, scf_solve, ScfOptions};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn reference() -> serde_json::Value {
    let text = std::fs::read_to_string(data("reference.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn h2(r: f64) -> MolecularIntegrals<f64> {
    s_orbital_integrals(&hydrogen_chain(2, &[r])).unwrap()
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn h2_overlap_against_quadrature() {
    // product of normalized primitives, integrated axis by axis
    let prims = sto3g_hydrogen::<f64>();
    let r = 1.4;
    let mut s01 = 0.0;
    for p in &prims {
        for q in &prims {
            let (a, b) = (p.exponent, q.exponent);
            let norm = (2.0 * a / std::f64::consts::PI).powf(0.75)
                * (2.0 * b / std::f64::consts::PI).powf(0.75);
            let transverse = simpson(|x| (-(a + b) * x * x).exp(), -12.0, 12.0, 4000);
            let axial = simpson(
                |z| (-a * z * z - b * (z - r) * (z - r)).exp(),
                -12.0,
                12.0 + r,
                4000,
            );
            s01 += p.coefficient * q.coefficient * norm * transverse * transverse * axial;
        }
    }
    let m = h2(r);
    assert!(
        (m.overlap[(0, 1)] - s01).abs() < 1e-8,
        "{} vs {s01}",
        m.overlap[(0, 1)]
    );
    assert!((s01 - 0.6593).abs() < 1e-3);
    let want = reference()["h2_r1.4"]["s01"].as_f64().unwrap();
    assert!((m.overlap[(0, 1)] - want).abs() < 1e-6);
}

#[test]
fn lowdin_integrals_match_fixture() {
    let m = h2(1.4);
    let x = lowdin_orthonormalize(&m.overlap).unwrap();
    let ours = m.transform(&x);
    let theirs: MolecularIntegrals<f64> = read_fcidump(data("h2_r1.4_lowdin.fcidump")).unwrap();
    assert!(
        ours.max_abs_diff(&theirs) < 1e-6,
        "{}",
        ours.max_abs_diff(&theirs)
    );

    let m4 = s_orbital_integrals(&hydrogen_chain(4, &[1.4])).unwrap();
    let x4 = lowdin_orthonormalize(&m4.overlap).unwrap();
    let theirs4: MolecularIntegrals<f64> = read_fcidump(data("h4_r1.4_lowdin.fcidump")).unwrap();
    assert!(m4.transform(&x4).max_abs_diff(&theirs4) < 1e-6);
}

#[test]
fn fixture_energies_reproduced() {
    let r = reference();
    for (file, key) in [
        ("h2_r1.4_mo.fcidump", "h2_r1.4"),
        ("h2_r1.4_lowdin.fcidump", "h2_r1.4"),
        ("h4_r1.4_lowdin.fcidump", "h4_r1.4"),
    ] {
        let m: MolecularIntegrals<f64> = read_fcidump(data(file)).unwrap();
        let sol = scf_solve(&m, &ScfOptions::default()).unwrap();
        assert!(sol.converged);
        let want = r[key]["e_hf"].as_f64().unwrap();
        assert!(
            (sol.e_total - want).abs() < 1e-7,
            "{file}: {} vs {want}",
            sol.e_total
        );
        let e_nuc = r[key]["e_nuc"].as_f64().unwrap();
        assert!((m.e_nuclear - e_nuc).abs() < 1e-12);
    }
}

#[test]
fn fcidump_round_trip_of_generated_h2() {
    let m = h2(1.4);
    let sol = scf_solve(&m, &ScfOptions::default()).unwrap();
    let mo = m.transform(&sol.coefficients);
    let text = emit_fcidump(&mo).unwrap();
    let back: MolecularIntegrals<f64> = parse_fcidump(&text).unwrap();
    assert!(back.max_abs_diff(&mo) < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h2.fcidump");
    write_fcidump(&mo, &path).unwrap();
    let again: MolecularIntegrals<f64> = read_fcidump(&path).unwrap();
    assert!(again.max_abs_diff(&mo) < 1e-12);
}

#[test]
fn fcidump_keeps_mixed_index_records() {
    // (12|21) style records land on every symmetry image
    let text = " &FCI NORB=2,NELEC=2,MS2=0,\n &END\n 0.25 1 2 1 2\n 0.1 2 1 2 2\n -1.0 1 1 0 0\n -0.5 2 2 0 0\n 0.0 0 0 0 0\n";
    let m: MolecularIntegrals<f64> = parse_fcidump(text).unwrap();
    for (p, q, r, s) in [(0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 0), (1, 0, 1, 0)] {
        assert_eq!(m.eri.get(p, q, r, s), 0.25);
    }
    for (p, q, r, s) in [(1, 0, 1, 1), (0, 1, 1, 1), (1, 1, 1, 0), (1, 1, 0, 1)] {
        assert_eq!(m.eri.get(p, q, r, s), 0.1);
    }
    assert_eq!(m.eri.symmetry_defect(), 0.0);
}

#[test]
fn manifest_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data("h2_r1.4_mo.fcidump"), dir.path().join("a.fcidump")).unwrap();
    let manifest = DatasetManifest::new(vec![ManifestEntry {
        id: "a".into(),
        source: MoleculeSource::Fcidump {
            path: "a.fcidump".into(),
        },
        target: Some(1.4),
        label: "z".into(),
    }]);
    let path = dir.path().join("manifest.json");
    std::fs::write(&path, manifest.to_json()).unwrap();
    let loaded = load_manifest(&path).unwrap();
    assert_eq!(loaded.entries, manifest.entries);
    let MoleculeSource::Fcidump { path: p } = &loaded.entries[0].source else {
        unreachable!()
    };
    assert!(loaded.resolve(p).exists());
}

#[test]
fn manifest_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("manifest.json");
    std::fs::write(&path, r#"{"format_version":1,"entries":[],"extra":true}"#).unwrap();
    assert!(load_manifest(&path).is_err());
}

fn chain_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    prop_oneof![Just(2usize), Just(4), Just(6)]
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0.8f64..3.0, n - 1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_leaves_integrals_unchanged(
        (n, bonds) in chain_strategy(),
        shift in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let g = hydrogen_chain(n, &bonds);
        let a = s_orbital_integrals(&g).unwrap();
        let b = s_orbital_integrals(&g.translated(shift)).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn generated_integrals_are_valid((n, bonds) in chain_strategy()) {
        let m = s_orbital_integrals(&hydrogen_chain(n, &bonds)).unwrap();
        prop_assert_eq!(m.eri.symmetry_defect(), 0.0);
        let (w, _) = qfp_core::linalg::sym_eigen(&m.overlap);
        prop_assert!(w[0] > 0.0);
        prop_assert!(max_abs(&(&m.overlap - m.overlap.transpose())) == 0.0);
    }

    #[test]
    fn feature_table_round_trip(
        rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 0..6),
    ) {
        let mut t = FeatureTable::new(vec![0.0, 0.5, 1.0]);
        for (i, r) in rows.iter().enumerate() {
            t.push(format!("m{i}"), r.clone()).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        save_features(&t, &path).unwrap();
        let back = load_features(&path).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn emit_parse_identity(h in prop::collection::vec(-2.0f64..2.0, 3), g in prop::collection::vec(-1.0f64..1.0, 6)) {
        let hm = DMatrix::from_row_slice(2, 2, &[h[0], h[1], h[1], h[2]]);
        let mut eri = qfp_core::linalg::EriTensor::zeros(2);
        let idx = [(0, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 1), (0, 1, 0, 1), (0, 1, 1, 1), (1, 1, 1, 1)];
        for (v, &(p, q, r, s)) in g.iter().zip(&idx) {
            eri.set_sym(p, q, r, s, *v);
        }
        let m = MolecularIntegrals::orthonormal(2, hm, eri, 0.3);
        let back: MolecularIntegrals<f64> = parse_fcidump(&emit_fcidump(&m).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&m) < 1e-12);
    }
}
