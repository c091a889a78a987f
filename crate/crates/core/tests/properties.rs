//! Property tests for the structural invariants: grid geometry, Haar
//! orthonormality, serialisation round-trips, and measure monotonicity.

use proptest::prelude::*;

use paraproduct_lab::bmo::RectangleUnion;
use paraproduct_lab::dyadic::{
    haar_value, least_common_ancestor, DyadicInterval, DyadicRectangle, GridSpec,
};
use paraproduct_lab::forms::{family_from_expansion, Axis, HaarExpansion2D};
use paraproduct_lab::sequences::{read_sequence_json, write_sequence_json, CoefficientSequence};

fn interval(max_scale: u32) -> impl Strategy<Value = DyadicInterval> {
    (0..=max_scale).prop_flat_map(|s| {
        (0..1u64 << s).prop_map(move |p| DyadicInterval::new(s, p).unwrap())
    })
}

fn rectangle(max_scale: u32) -> impl Strategy<Value = DyadicRectangle> {
    (interval(max_scale), interval(max_scale)).prop_map(|(x, y)| DyadicRectangle::new(x, y))
}

proptest! {
    #[test]
    fn lca_contains_both_and_is_minimal(a in interval(6), b in interval(6)) {
        let l = least_common_ancestor(&a, &b);
        prop_assert!(l.contains(&a) && l.contains(&b));
        for child in [l.left_child().unwrap(), l.right_child().unwrap()] {
            prop_assert!(!(child.contains(&a) && child.contains(&b)));
        }
    }

    #[test]
    fn containment_agrees_with_endpoints(a in interval(6), b in interval(6)) {
        // Integer containment matches real-interval containment.
        let (a0, a1) = (
            a.position() as f64 / (1u64 << a.scale()) as f64,
            (a.position() + 1) as f64 / (1u64 << a.scale()) as f64,
        );
        let (b0, b1) = (
            b.position() as f64 / (1u64 << b.scale()) as f64,
            (b.position() + 1) as f64 / (1u64 << b.scale()) as f64,
        );
        prop_assert_eq!(a.contains(&b), a0 <= b0 && b1 <= a1);
    }

    #[test]
    fn haar_system_is_orthonormal(a in interval(3), b in interval(3)) {
        let grid = GridSpec::new(4).unwrap();
        let mut inner = 0.0;
        for cell in grid.cells() {
            let ha: f64 = haar_value(&a, &cell).unwrap();
            let hb: f64 = haar_value(&b, &cell).unwrap();
            inner += ha * hb * grid.cell_measure::<f64>();
        }
        let expected = if a == b { 1.0 } else { 0.0 };
        prop_assert!((inner - expected).abs() < 1e-12);
    }

    #[test]
    fn rectangle_json_roundtrip(r in rectangle(8)) {
        let json = serde_json::to_string(&r).unwrap();
        let back: DyadicRectangle = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn sequence_file_roundtrip(
        entries in proptest::collection::btree_map(rectangle(5), -10.0..10.0f64, 0..12)
    ) {
        let seq = CoefficientSequence::from_entries(entries).unwrap();
        let mut buf = Vec::new();
        write_sequence_json(&seq, &mut buf).unwrap();
        let back: CoefficientSequence<f64> = read_sequence_json(&buf[..]).unwrap();
        prop_assert_eq!(back, seq);
    }

    #[test]
    fn family_split_preserves_norm(
        coeffs in proptest::collection::btree_map(rectangle(2), -5.0..5.0f64, 1..10)
    ) {
        let expansion = HaarExpansion2D::from_entries(coeffs).unwrap();
        for axis in [Axis::XHaar, Axis::YHaar] {
            let family = family_from_expansion(&expansion, axis, 3).unwrap();
            prop_assert!((family.norm_sq() - expansion.norm_sq()).abs() < 1e-10);
        }
    }

    #[test]
    fn union_measure_bounds(parts in proptest::collection::vec(rectangle(6), 1..6)) {
        let union = RectangleUnion::new(parts.clone());
        let measure: f64 = union.measure();
        let largest = parts.iter().map(|r| r.area::<f64>()).fold(0.0, f64::max);
        let total: f64 = parts.iter().map(|r| r.area::<f64>()).sum();
        prop_assert!(measure >= largest - 1e-15);
        prop_assert!(measure <= total.min(1.0) + 1e-15);
        // Monotone under adding a part.
        let mut more = parts.clone();
        more.push(DyadicRectangle::unit());
        let bigger: f64 = RectangleUnion::new(more).measure();
        prop_assert!(bigger + 1e-15 >= measure);
    }
}
