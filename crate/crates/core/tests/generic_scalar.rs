//! The analytic core is generic over the scalar; exercise the `f32`
//! instantiation at f32-appropriate tolerances.

use paraproduct_lab::bmo::{prod_bmo_exact, rect_bmo};
use paraproduct_lab::dyadic::{haar_value, DyadicInterval};
use paraproduct_lab::norms::{mlambda_norm, spectral_norm_dense, x_norm, xprime_norm};
use paraproduct_lab::sequences::{
    column_example, hadamard_sequence, identity_example, walsh_hadamard,
};

#[test]
fn f32_haar_values() {
    let unit = DyadicInterval::unit();
    let left = DyadicInterval::new(1, 0).unwrap();
    assert_eq!(haar_value::<f32>(&unit, &left.left_child().unwrap()).unwrap(), 1.0f32);
    // [1/4, 1/2) is the right half of [0, 1/2).
    let h: f32 = haar_value(&left, &DyadicInterval::new(2, 1).unwrap()).unwrap();
    assert_eq!(h, -(2f32.sqrt()));
}

#[test]
fn f32_norms_match_closed_forms() {
    let identity = identity_example::<f32>(2).unwrap();
    assert!((x_norm(&identity, 2).unwrap() - 1.0).abs() < 1e-4);
    assert!((rect_bmo(&identity).unwrap() - 3f32.sqrt()).abs() < 1e-5);

    let column = column_example::<f32>(4).unwrap();
    assert!((mlambda_norm(&column, 4).unwrap() - 5f32.sqrt()).abs() < 1e-4);
    assert!((prod_bmo_exact(&column).unwrap() - (2.0 - 2f32.powi(-4)).sqrt()).abs() < 1e-5);

    let hadamard = hadamard_sequence::<f32>(1).unwrap();
    assert!((x_norm(&hadamard, 1).unwrap() - 1.0).abs() < 1e-4);
    assert!((xprime_norm(&hadamard, 1).unwrap() - 2f32.sqrt()).abs() < 1e-4);
}

#[test]
fn f32_dense_engine() {
    let h = walsh_hadamard::<f32>(3).unwrap();
    let norm = spectral_norm_dense(&h).unwrap();
    assert!((norm - 8f32.sqrt()).abs() < 1e-4);
}
