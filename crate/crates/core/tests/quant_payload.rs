use proptest::prelude::*;
use rand::Rng;

use udep::basis::{CoordVector, Variant};
use udep::codec::{decode, encode};
use udep::linalg::haar_unitary;
use udep::linalg::random::stream;
use udep::payload::{deserialize, quantized_body_len, serialize, EncodedPayload, FormatError, HEADER_LEN};
use udep::quant::{dequantize, quantize, QuantizerSpec};

fn spec_strategy() -> impl Strategy<Value = QuantizerSpec> {
    (1u8..=16, -100.0f64..100.0, 0.01f64..100.0)
        .prop_map(|(bits, lo, width)| QuantizerSpec::new(bits, lo, lo + width).unwrap())
}

proptest! {
    #[test]
    fn quantizer_is_monotone(spec in spec_strategy(), a in -300.0f64..300.0, b in -300.0f64..300.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(spec.index_of(lo) <= spec.index_of(hi));
    }

    #[test]
    fn reconstruction_error_is_bounded(spec in spec_strategy(), v in -300.0f64..300.0) {
        let r = spec.value_of(spec.index_of(v)).unwrap();
        let half = spec.step() / 2.0;
        let slack = 1e-9 * (1.0 + v.abs());
        if v >= spec.lo() && v <= spec.hi() {
            prop_assert!((r - v).abs() <= half + slack);
        } else {
            let outside = if v > spec.hi() { v - spec.hi() } else { spec.lo() - v };
            prop_assert!((r - v).abs() <= outside + half + slack);
        }
    }

    #[test]
    fn quantized_payloads_round_trip(seed in any::<u64>(), bits in 1u8..=16) {
        let mut rng = stream(seed);
        let n = rng.gen_range(1..6);
        let alpha = encode(&haar_unitary(n, &mut rng), &Variant::Full).unwrap();
        let bound = udep::codec::coefficient_bound(n);
        let spec = QuantizerSpec::new(bits, -bound, bound).unwrap();
        let p = EncodedPayload::quantized_uniform(&alpha, spec);
        let bytes = serialize(&p).unwrap();
        prop_assert_eq!(bytes.len(), HEADER_LEN + quantized_body_len(&[(bits, n * n)]));
        let q = deserialize(&bytes).unwrap();
        prop_assert_eq!(&q, &p);
        prop_assert_eq!(serialize(&q).unwrap(), bytes);
        // The decoded matrix is unitary whatever the resolution.
        let u = decode(&q.to_coords().unwrap()).unwrap();
        prop_assert!(udep::linalg::unitarity_defect(&u) <= 1e-9 * n as f64);
    }

    #[test]
    fn header_corruption_is_detected(seed in any::<u64>(), pos in 0usize..HEADER_LEN, value in any::<u8>()) {
        let mut rng = stream(seed);
        let coords: Vec<f64> = (0..9).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let p = EncodedPayload::raw(&CoordVector::new(3, Variant::Full, coords).unwrap());
        let mut bytes = serialize(&p).unwrap();
        prop_assume!(bytes[pos] != value);
        bytes[pos] = value;
        prop_assert!(deserialize(&bytes).is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let _ = deserialize(&bytes);
    }
}

#[test]
fn uniform_input_mse_matches_step_squared_over_twelve() {
    let spec = QuantizerSpec::new(6, -2.0, 3.0).unwrap();
    let mut rng = stream(77);
    let values: Vec<f64> = (0..1_000_000).map(|_| rng.gen_range(-2.0..3.0)).collect();
    let back = dequantize(&quantize(&values, &spec), &spec).unwrap();
    let mse = values.iter().zip(&back).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / values.len() as f64;
    let expected = spec.step().powi(2) / 12.0;
    assert!((mse / expected - 1.0).abs() < 0.05, "mse {mse} vs {expected}");
}

#[test]
fn truncated_payloads_report_truncation() {
    let coords = CoordVector::new(2, Variant::Full, vec![0.5; 4]).unwrap();
    let bytes = serialize(&EncodedPayload::raw(&coords)).unwrap();
    for cut in 4..bytes.len() {
        let err = deserialize(&bytes[..cut]).unwrap_err();
        assert!(matches!(err, FormatError::Truncated { .. }), "cut {cut}: {err:?}");
    }
    assert!(matches!(deserialize(b"nope"), Err(FormatError::BadMagic)));
}
