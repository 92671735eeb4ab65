use num_complex::Complex64;
use proptest::prelude::*;

use udep::basis::{basis_element, coords_from_skew, dims, skew_from_coords, CoordVector, Variant};
use udep::bench::sample_symmetric_unitary;
use udep::codec::encode;
use udep::linalg::random::{complex_gaussian_matrix, stream};
use udep::linalg::{haar_orthogonal, haar_unitary};

#[test]
fn basis_is_orthonormal() {
    for n in 1usize..=8 {
        let basis: Vec<_> = (1..=n * n).map(|k| basis_element(k, n).unwrap()).collect();
        for (i, a) in basis.iter().enumerate() {
            assert!(a.skew_hermitian_defect() < 1e-15);
            if i > 0 {
                assert!(a.trace().norm() < 1e-12, "B_{} not traceless", i + 1);
            }
            for (j, b) in basis.iter().enumerate() {
                let ip: Complex64 = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-12, "n={n} <B{},B{}>", i + 1, j + 1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn coordinates_are_an_isometry(seed in any::<u64>(), n in 1usize..9) {
        let g = complex_gaussian_matrix(n, n, &mut stream(seed));
        let x = g.skew_hermitian_part();
        let alpha = coords_from_skew(&x, &Variant::Full).unwrap();
        let norm = alpha.coords().iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - x.frobenius_norm()).abs() < 1e-10);
        prop_assert!(skew_from_coords(&alpha).distance(&x) < 1e-12 * (1.0 + norm));
    }

    #[test]
    fn coordinate_synthesis_inverts_analysis(coords in proptest::collection::vec(-5.0f64..5.0, 16)) {
        let alpha = CoordVector::new(4, Variant::Full, coords.clone()).unwrap();
        let back = coords_from_skew(&skew_from_coords(&alpha), &Variant::Full).unwrap();
        for (a, b) in back.coords().iter().zip(&coords) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_unitaries_have_no_antisymmetric_coordinates(seed in any::<u64>(), n in 1usize..9) {
        let u = sample_symmetric_unitary(n, &mut stream(seed));
        let alpha = encode(&u, &Variant::Full).unwrap();
        let start = dims(&Variant::Symmetric, n);
        prop_assert!(alpha.coords()[start..].iter().all(|v| v.abs() <= 1e-9));
    }

    #[test]
    fn rotations_have_no_imaginary_coordinates(seed in any::<u64>(), n in 2usize..9) {
        let mut o = haar_orthogonal(n, &mut stream(seed));
        if o.determinant().unwrap().re < 0.0 {
            for z in o.row_mut(0) {
                *z = -*z;
            }
        }
        let alpha = encode(&o, &Variant::Full).unwrap();
        let end = n * n - dims(&Variant::Rotation, n);
        prop_assert!(alpha.coords()[..end].iter().all(|v| v.abs() <= 1e-9));
    }
}

#[test]
fn variant_dimensions() {
    for n in 1usize..=10 {
        assert_eq!(dims(&Variant::Full, n), n * n);
        assert_eq!(dims(&Variant::SpecialUnitary, n), n * n - 1);
        assert_eq!(dims(&Variant::Symmetric, n), n * (n + 1) / 2);
        assert_eq!(dims(&Variant::Rotation, n), n * (n - 1) / 2);
    }
    assert_eq!(dims(&Variant::BlockDiagonal(vec![2, 3]), 5), 13);
}

#[test]
fn block_coordinates_reject_off_block_entries() {
    let u = haar_unitary(4, &mut stream(5));
    let x = udep::linalg::matrix_log_unitary(&u).unwrap();
    assert!(coords_from_skew(&x, &Variant::BlockDiagonal(vec![2, 2])).is_err());
}
