use dctpipe_core::codec::{
    dequantize, dpcm_decode, dpcm_encode, entropy_decode, entropy_encode, quality_to_quant_tables,
    quantize, rle_decode, rle_encode, zigzag_scan, zigzag_unscan, DctBlock, DpcmStream,
    HuffmanSpec, QuantTable, RleSymbolSequence,
};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = [i32; 64]> {
    prop::collection::vec(any::<i32>(), 64).prop_map(|v| v.try_into().unwrap())
}

/// Mostly-zero AC vectors, like real quantized blocks.
fn sparse_ac(max: i32) -> impl Strategy<Value = [i32; 63]> {
    let coef = prop_oneof![6 => Just(0), 2 => -max..=max];
    prop::collection::vec(coef, 63).prop_map(|v| v.try_into().unwrap())
}

fn blocks() -> impl Strategy<Value = Vec<(i32, [i32; 63])>> {
    prop::collection::vec((-1023i32..=1023, sparse_ac(1023)), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn zigzag_roundtrips(g in grid()) {
        prop_assert_eq!(zigzag_unscan(&zigzag_scan(&g)), g);
        prop_assert_eq!(zigzag_scan(&zigzag_unscan(&g)), g);
    }

    #[test]
    fn dpcm_roundtrips(dc in prop::collection::vec(-2047i32..=2047, 1..64)) {
        let stream = dpcm_encode(&dc).unwrap();
        prop_assert_eq!(stream.diffs()[0], dc[0]);
        prop_assert_eq!(&dpcm_decode(&stream).unwrap(), &dc);
    }

    #[test]
    fn dpcm_decode_then_encode(diffs in prop::collection::vec(-4094i32..=4094, 1..64)) {
        let stream = DpcmStream(diffs);
        prop_assert_eq!(dpcm_encode(&dpcm_decode(&stream).unwrap()).unwrap(), stream);
    }

    #[test]
    fn rle_roundtrips(ac in sparse_ac(1023)) {
        let seq = rle_encode(&ac);
        prop_assert_eq!(rle_decode(&seq).unwrap(), ac);
        prop_assert_eq!(rle_encode(&rle_decode(&seq).unwrap()), seq);
    }

    #[test]
    fn entropy_coding_roundtrips(blocks in blocks(), chroma in any::<bool>()) {
        let (dc_table, ac_table) = if chroma {
            (HuffmanSpec::chroma_dc(), HuffmanSpec::chroma_ac())
        } else {
            (HuffmanSpec::luma_dc(), HuffmanSpec::luma_ac())
        };
        let dc: Vec<i32> = blocks.iter().map(|b| b.0).collect();
        let dpcm = dpcm_encode(&dc).unwrap();
        let rle: Vec<RleSymbolSequence> = blocks.iter().map(|b| rle_encode(&b.1)).collect();
        let bytes = entropy_encode(&dpcm, &rle, &dc_table, &ac_table).unwrap();
        for pair in bytes.windows(2) {
            prop_assert!(pair[0] != 0xFF || pair[1] == 0x00);
        }
        let (dpcm_back, rle_back) = entropy_decode(&bytes, blocks.len(), &dc_table, &ac_table).unwrap();
        prop_assert_eq!(dpcm_back, dpcm);
        prop_assert_eq!(rle_back, rle);
    }

    #[test]
    fn quantization_error_is_bounded(
        coeffs in prop::collection::vec(-1024.0f64..=1024.0, 64),
        divisors in prop::collection::vec(1u16..=255, 64),
    ) {
        let d = DctBlock(coeffs.try_into().unwrap());
        let q = QuantTable::from_natural(divisors.try_into().unwrap()).unwrap();
        let back = dequantize(&quantize(&d, &q), &q);
        let natural = q.natural();
        for k in 0..64 {
            prop_assert!((back.0[k] - d.0[k]).abs() <= natural[k] as f64 / 2.0 + 0.5);
        }
    }

    #[test]
    fn lower_quality_never_has_smaller_divisors(q1 in 1i32..=100, q2 in 1i32..=100) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        let (l_lo, c_lo) = quality_to_quant_tables(lo).unwrap();
        let (l_hi, c_hi) = quality_to_quant_tables(hi).unwrap();
        for k in 0..64 {
            prop_assert!(l_lo.zigzag()[k] >= l_hi.zigzag()[k]);
            prop_assert!(c_lo.zigzag()[k] >= c_hi.zigzag()[k]);
        }
    }
}
