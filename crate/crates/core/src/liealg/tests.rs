use nalgebra::{DMatrix, DVector};

use super::presentations::{build_presentation_with, matrix_basis};
use super::quat::{QuatMatrix, Quaternion};
use super::*;

fn all_small() -> Vec<SpherePresentation> {
    let mut out = Vec::new();
    for kind in PresentationKind::ALL {
        for n in kind.min_n()..kind.min_n() + 2 {
            out.push(build_presentation(kind, n).unwrap());
        }
    }
    out
}

/// Coordinates of a matrix in the basis by Gram solve on quaternion inner products.
fn quat_coords(basis: &[BlockElement], x: &BlockElement) -> DVector<f64> {
    let d = basis.len();
    let gram = DMatrix::from_fn(d, d, |i, j| basis[i].inner(&basis[j]));
    let rhs = DVector::from_fn(d, |k, _| basis[k].inner(x));
    gram.lu().solve(&rhs).unwrap()
}

fn e(dim: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(dim);
    v[i] = 1.0;
    v
}

#[test]
fn dimensions() {
    let cases = [
        (PresentationKind::So, 3, 2, 1),
        (PresentationKind::Su, 3, 5, 3),
        (PresentationKind::U, 2, 3, 1),
        (PresentationKind::Sp, 2, 7, 3),
        (PresentationKind::SpU1, 2, 7, 4),
        (PresentationKind::SpSp1, 2, 7, 6),
        (PresentationKind::SpU1, 3, 11, 11),
    ];
    for (kind, n, dm, dh) in cases {
        let p = build_presentation(kind, n).unwrap();
        assert_eq!(p.dim_m(), dm, "{kind} {n}");
        assert_eq!(p.decomposition.dim_h(), dh, "{kind} {n}");
    }
}

#[test]
fn algebra_axioms_hold() {
    for p in all_small() {
        let alg = &p.decomposition.algebra;
        assert!(alg.antisymmetry_defect() == 0.0, "{}", p.name());
        assert!(alg.jacobi_defect() <= 1e-12, "{} {:e}", p.name(), alg.jacobi_defect());
        assert!(alg.bi_invariance_defect() <= 1e-12, "{}", p.name());
        let d = p.decomposition.defects();
        assert!(d.hh_in_h <= 1e-12 && d.hm_in_m <= 1e-12 && d.orthogonality <= 1e-12, "{}", p.name());
        assert!(p.decomposition.block_invariance_defect(&p.m_blocks) <= 1e-12);
    }
}

#[test]
fn bi_inner_normalises_v0() {
    // |e1|^2 = |iE11|^2 + |v0|^2 = 2
    let p = build_sp_u1(2).unwrap();
    let g = p.decomposition.m_gram();
    assert!((g[(0, 0)] - 2.0).abs() < 1e-15);
    assert!((g[(1, 1)] - 1.0).abs() < 1e-15);
    assert!((g[(3, 3)] - 2.0).abs() < 1e-15);
}

#[test]
fn realisations_agree() {
    for kind in PresentationKind::ALL {
        let n = kind.min_n();
        let algs: Vec<LieAlgebra> = [Realization::Quaternionic, Realization::Complex, Realization::Real]
            .iter()
            .map(|&r| build_presentation_with(kind, n, r).unwrap().decomposition.algebra)
            .collect();
        let d = algs[0].dim();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let c = algs[0].c(i, j, k);
                    assert!((algs[1].c(i, j, k) - c).abs() < 1e-13);
                    assert!((algs[2].c(i, j, k) - c).abs() < 1e-13);
                }
            }
        }
        assert!((&algs[1].bi_inner - &algs[2].bi_inner).amax() < 1e-13);
    }
}

#[test]
fn so3_cross_product() {
    let mut basis = Vec::new();
    for (r, c) in [(2, 1), (0, 2), (1, 0)] {
        let mut m = QuatMatrix::unit(3, r, c, Quaternion::ONE);
        m.set(c, r, -Quaternion::ONE);
        basis.push(BlockElement(vec![m]));
    }
    let alg = LieAlgebra::from_blocks(vec!["e1".into(), "e2".into(), "e3".into()], &basis, Realization::Real).unwrap();
    let br = alg.bracket(&e(3, 0), &e(3, 1)).unwrap();
    assert!((br - e(3, 2)).amax() < 1e-15);
    let x = DVector::from_vec(vec![0.3, -1.0, 2.0]);
    assert_eq!(alg.bracket(&x, &x).unwrap().amax(), 0.0);
}

#[test]
fn from_constants_rejects_non_jacobi() {
    let mut c = vec![0.0; 27];
    c[(0 * 3 + 1) * 3 + 2] = 1.0;
    c[(1 * 3 + 0) * 3 + 2] = -1.0;
    c[(1 * 3 + 2) * 3 + 2] = 1.0;
    c[(2 * 3 + 1) * 3 + 2] = -1.0;
    let labels = vec!["a".into(), "b".into(), "c".into()];
    let r = LieAlgebra::from_constants(labels, c, DMatrix::identity(3, 3));
    assert!(r.is_ok() || matches!(r, Err(crate::Error::Algebra(_))));
    let mut bad = vec![0.0; 27];
    bad[(0 * 3 + 1) * 3 + 2] = 1.0;
    let labels = vec!["a".into(), "b".into(), "c".into()];
    assert!(LieAlgebra::from_constants(labels, bad, DMatrix::identity(3, 3)).is_err());
}

#[test]
fn sp_u1_bracket_matches_quaternion_oracle() {
    let (basis, _, _) = matrix_basis(PresentationKind::SpU1, 2).unwrap();
    let p = build_sp_u1(2).unwrap();
    let alg = &p.decomposition.algebra;
    let d = alg.dim();
    // [jE11, kE11] = 2 iE11 = (iE11, -v0) + (iE11, v0)
    let j = BlockElement(vec![QuatMatrix::unit(2, 0, 0, Quaternion::J), QuatMatrix::zeros(1)]);
    let k = BlockElement(vec![QuatMatrix::unit(2, 0, 0, Quaternion::K), QuatMatrix::zeros(1)]);
    let oracle = quat_coords(&basis.elements, &j.commutator(&k));
    let br = alg.bracket(&e(d, 1), &e(d, 2)).unwrap();
    assert!((&br - &oracle).amax() < 1e-14);
    assert!((br[0] - 1.0).abs() < 1e-14 && (br[d - 1] - 1.0).abs() < 1e-14);
    // every basis pair
    for a in 0..d {
        for b in 0..d {
            let oracle = quat_coords(&basis.elements, &basis.elements[a].commutator(&basis.elements[b]));
            let br = alg.bracket(&e(d, a), &e(d, b)).unwrap();
            assert!((br - oracle).amax() < 1e-13);
        }
    }
}

#[test]
fn trivial_and_rotation_actions() {
    let p = build_sp_u1(2).unwrap();
    let dec = &p.decomposition;
    for a in &dec.isotropy_generators {
        assert!(a.column(0).amax() < 1e-15);
    }
    // U(1) generator (iE11, v0) on span{e2, e3}: [i, j] = 2k, [i, k] = -2j
    let u1 = dec.isotropy_generators.last().unwrap();
    let block = u1.view((1, 1), (2, 2)).into_owned();
    let expected = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
    assert!((block - expected).amax() < 1e-14);
    let (basis, _, _) = matrix_basis(PresentationKind::SpU1, 2).unwrap();
    let h = basis.elements.last().unwrap();
    let oracle = quat_coords(&basis.elements, &h.commutator(&basis.elements[1]));
    assert!((oracle[2] - 2.0).abs() < 1e-14);
}

#[test]
fn m_bracket_cases() {
    let so = build_presentation(PresentationKind::So, 4).unwrap();
    let dec = &so.decomposition;
    for i in 0..dec.dim_m() {
        for j in 0..dec.dim_m() {
            assert_eq!(dec.m_bracket(&e(3, i), &e(3, j)).unwrap().amax(), 0.0);
        }
    }
    // Sp(2)U(1): [jE11, E12 - E21] = j(E12 + E21) = e6
    let p = build_sp_u1(2).unwrap();
    let (basis, _, _) = matrix_basis(PresentationKind::SpU1, 2).unwrap();
    let full = quat_coords(&basis.elements, &basis.elements[1].commutator(&basis.elements[3]));
    let (oracle_m, _) = p.decomposition.split(&full);
    let mb = p.decomposition.m_bracket(&e(7, 1), &e(7, 3)).unwrap();
    assert!((&mb - &oracle_m).amax() < 1e-14);
    assert!((&mb - e(7, 5)).amax() < 1e-14);
    let x = DVector::from_vec(vec![0.1, 0.2, -0.4, 1.0, 0.0, 0.3, 0.5]);
    assert!(p.decomposition.m_bracket(&x, &x).unwrap().amax() < 1e-15);
    let mut bad = p.decomposition.embed_m(&x);
    bad[10] = 1e-6;
    assert!(matches!(
        p.decomposition.m_bracket_full(&bad, &p.decomposition.embed_m(&x)),
        Err(crate::Error::InvalidInput(_))
    ));
}

fn rank(m: &DMatrix<f64>) -> usize {
    let s = m.clone().svd(false, false).singular_values;
    let max = s.max();
    s.iter().filter(|&&v| v > 1e-10 * max.max(1e-300)).count()
}

#[test]
fn orbit_tangent_ranks() {
    let so3 = build_presentation(PresentationKind::So, 3).unwrap();
    let t = so3.decomposition.orbit_tangent_matrix(&e(2, 0));
    assert_eq!(rank(&t), 1);
    let p = build_sp_u1(2).unwrap();
    let (basis, _, _) = matrix_basis(PresentationKind::SpU1, 2).unwrap();
    let u = e(7, 0);
    let t = p.decomposition.orbit_tangent_matrix(&u);
    let dm = p.dim_m();
    let oracle = DMatrix::from_fn(dm, p.decomposition.dim_h(), |r, c| {
        let h = &basis.elements[dm + c];
        quat_coords(&basis.elements, &h.commutator(&basis.elements[0]))[r]
    });
    assert_eq!(rank(&t), rank(&oracle));
    assert_eq!(t.amax(), 0.0);
    let u = DVector::from_vec(vec![0.4, 0.7, 0.0, 0.5, 0.0, 0.0, 0.0]);
    // e3 from the U(1) factor, e5, e6, e7 from sp(1)
    assert_eq!(rank(&p.decomposition.orbit_tangent_matrix(&u)), 4);
}

#[test]
fn exceptional_presentations_out_of_scope() {
    for name in ["g2", "Spin7/G2", "spin9"] {
        assert!(matches!(name.parse::<PresentationKind>(), Err(crate::Error::OutOfScope(_))));
    }
    assert!(matches!("so".parse::<PresentationKind>(), Ok(PresentationKind::So)));
    assert!(build_presentation(PresentationKind::Sp, 1).is_err());
    assert!(build_presentation(PresentationKind::Su, 2).is_err());
}

#[test]
fn sp_sp1_blocks() {
    let p = build_presentation(PresentationKind::SpSp1, 2).unwrap();
    let dims: Vec<usize> = p.m_blocks.iter().map(|b| b.len()).collect();
    assert_eq!(dims, vec![3, 4]);
}

#[test]
fn export_is_json() {
    let p = build_sp_u1(2).unwrap();
    let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["sphere_dim"], 7);
    assert_eq!(v["algebra"]["m_indices"].as_array().unwrap().len(), 7);
}

#[test]
fn weak_symmetry_search() {
    let budget = SearchBudget::default();
    let so = build_presentation(PresentationKind::So, 3).unwrap();
    let r = check_weakly_symmetric(&so, &DVector::from_vec(vec![0.6, -0.8]), budget).unwrap();
    assert!(r.found);
    let spsp = build_presentation(PresentationKind::SpSp1, 2).unwrap();
    let u = DVector::from_vec(vec![0.3, -0.5, 0.2, 0.7, 0.1, -0.4, 0.25]);
    let r = check_weakly_symmetric(&spsp, &u, budget).unwrap();
    assert!(r.found, "{r:?}");
    let su = build_presentation(PresentationKind::Su, 3).unwrap();
    let u = DVector::from_vec(vec![0.5, 0.3, -0.2, 0.6, 0.1]);
    let r = check_weakly_symmetric(&su, &u, budget).unwrap();
    assert!(!r.found);
    assert!(r.residual > 0.1);
}
