mod common;

use common::*;
use gwf::io::{
    decode_data, decode_ensemble, decode_matrix, decode_signal, encode_data, encode_ensemble,
    encode_matrix, encode_signal, read_ensemble, read_signal, write_ensemble, write_signal,
};
use gwf::measurement::{EnsembleKind, InterferometricData};
use gwf::gaussian::gen_gaussian_phase_retrieval;
use gwf::Error;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn containers_round_trip(n in 1usize..6, m in 1usize..8, s in any::<u64>()) {
        let ens = rand_ensemble(n, m, s);
        prop_assert_eq!(decode_ensemble(&encode_ensemble(&ens)).unwrap(), ens);
        let data = InterferometricData::new(rand_vec(&mut rng(s ^ 1), m)).unwrap();
        prop_assert_eq!(decode_data(&encode_data(&data)).unwrap(), data);
        let x = rand_matrix(n, s ^ 2);
        prop_assert_eq!(decode_matrix(&encode_matrix(&x)).unwrap(), x);
        let sig = rand_signal(n, s ^ 3);
        prop_assert_eq!(decode_signal(&encode_signal(&sig)).unwrap(), sig);
    }

    #[test]
    fn truncation_is_a_format_error(n in 1usize..4, m in 1usize..4, s in any::<u64>(), cut in 0.0f64..1.0) {
        let bytes = encode_ensemble(&rand_ensemble(n, m, s));
        let len = ((bytes.len() as f64) * cut) as usize;
        let is_format = matches!(decode_ensemble(&bytes[..len]), Err(Error::Format { .. }));
        prop_assert!(is_format);
    }

    #[test]
    fn non_finite_values_are_located(n in 1usize..5, s in any::<u64>(), at in 0usize..5) {
        let sig = rand_signal(n, s);
        let mut bytes = encode_signal(&sig);
        let idx = at % n;
        let offset = 12 + 16 * idx;
        bytes[offset..offset + 8].copy_from_slice(&f64::NAN.to_le_bytes());
        match decode_signal(&bytes) {
            Err(Error::Format { offset: o, .. }) => prop_assert_eq!(o as usize, offset),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn bad_magic_reports_offset_zero() {
    let mut bytes = encode_signal(&rand_signal(3, 1));
    bytes[0] = b'X';
    assert!(matches!(decode_signal(&bytes), Err(Error::Format { offset: 0, .. })));
    assert!(matches!(decode_data(&encode_signal(&rand_signal(3, 1))), Err(Error::Format { offset: 0, .. })));
}

#[test]
fn trailing_bytes_and_zero_dimensions_are_rejected() {
    let mut bytes = encode_signal(&rand_signal(3, 1));
    bytes.push(0);
    assert!(matches!(decode_signal(&bytes), Err(Error::Format { .. })));
    let mut zero = b"IFS1".to_vec();
    zero.extend_from_slice(&0u64.to_le_bytes());
    assert!(matches!(decode_signal(&zero), Err(Error::Format { offset: 4, .. })));
}

#[test]
fn files_round_trip_and_keep_ensemble_kind() {
    let dir = tempfile::tempdir().unwrap();
    let pr = gen_gaussian_phase_retrieval(4, 6, 9).unwrap();
    let path = dir.path().join("pr.ifn");
    write_ensemble(&path, &pr).unwrap();
    let back = read_ensemble(&path).unwrap();
    assert_eq!(back.kind(), EnsembleKind::PhaseRetrieval);
    assert_eq!(back, pr);
    let sig = rand_signal(5, 2);
    let spath = dir.path().join("s.ifs");
    write_signal(&spath, &sig).unwrap();
    assert_eq!(read_signal(&spath).unwrap(), sig);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 2);
    assert!(matches!(read_signal(&dir.path().join("missing.ifs")), Err(Error::Io { .. })));
}
