mod common;

use common::*;
use flagpde::liemod::*;
use flagpde::{Coefficient, QSqrt2, Rational};

#[test]
fn structure_and_identities() {
    lie_suite(3).unwrap();
}

#[test]
fn harmonic_modules_match_kernel() {
    for k in 0..=4 {
        so_module_complete(4, k).unwrap();
    }
    for k in 0..=3 {
        so_module_complete(5, k).unwrap();
    }
}

#[test]
fn sl_modules_match_kernel() {
    for (l1, l2) in [(0, 0), (1, 0), (0, 2), (1, 1), (2, 1), (2, 2)] {
        sl_complete(4, l1, l2).unwrap();
    }
}

#[test]
fn g2_modules_match_kernel() {
    g2_complete(4).unwrap();
}

#[test]
fn highest_vectors_are_singular() {
    for n in [3, 4, 5] {
        let action = so_action(n).unwrap();
        action.check_borel().unwrap();
        for k in 0..=3 {
            let w = verify_singular(&action, &so_highest_vector(n, k)).unwrap();
            assert_eq!(w.len(), n / 2);
        }
    }
    let sl = sl_action(3).unwrap();
    let w = verify_singular(&sl, &sl_highest_vector(3, 2, 1)).unwrap();
    assert_eq!(w.len(), 2);
    let g2 = g2_action();
    let w = verify_singular(&g2, &g2_highest_vector(3).map_coeffs(QSqrt2::from_rational)).unwrap();
    assert_eq!(w.len(), 2);
}

#[test]
fn non_highest_vectors_are_rejected() {
    let sl = sl_action(3).unwrap();
    let f = flagpde::QPoly::var("x2");
    assert!(matches!(verify_singular(&sl, &f), Err(flagpde::Error::NotSingular { .. })));
}

#[test]
fn closure_on_random_polynomials() {
    sl_action(3).unwrap().check_closure(3, 5).unwrap();
    so_action(4).unwrap().check_closure(3, 5).unwrap();
}

#[test]
fn zeta_powers_follow_the_eigenvalue_law() {
    let g = sl_highest_vector(3, 2, 1);
    for i in 0..=3 {
        check_zeta_power(3, &g, i).unwrap();
    }
}

#[test]
fn decompositions_are_direct() {
    for (n, l1, l2) in [(3, 1, 1), (3, 2, 2), (4, 2, 1)] {
        let d = sl_decomposition(n, l1, l2).unwrap();
        assert!(d.is_direct_sum(), "{d:?}");
    }
}

#[test]
fn only_one_g2_laplacian_reading_commutes() {
    assert_eq!(g2_laplacian_commutes(G2LaplacianReading::FirstSquare, 2).unwrap(), None);
    assert!(g2_laplacian_commutes(G2LaplacianReading::SecondSquare, 2).unwrap().is_some());
    let lap: flagpde::Operator<Rational> = g2_laplacian(G2LaplacianReading::FirstSquare);
    assert_eq!(lap.apply(&eta()).unwrap(), flagpde::QPoly::from_i64(14));
}
