//! Bit-exact reference vectors for the blob format and coder.

use gentle_press_core::codec::{arith, decode, encode, quantize_estimate, regularize, EncodedBlob};
use gentle_press_core::qmath::DensityMatrix;
use std::path::PathBuf;

fn fixture(name: &str) -> Vec<u8> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    hex(text.trim())
}

fn hex(s: &str) -> Vec<u8> {
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
}

fn to_hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn manual_blob(d: u8, b: u16, coefficients: Vec<i64>, model: Vec<u64>, symbols: &[u32]) -> EncodedBlob {
    let table = arith::FrequencyTable::new(&model).unwrap();
    let (payload, payload_bits, _) = arith::encode_symbols(symbols, &table).unwrap();
    EncodedBlob { d, n: symbols.len() as u64, precision: b, coefficients, model, payload_bits, payload }
}

#[test]
fn matches_reference_d2() {
    let symbols = [
        0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0,
        0, 1, 0, 0,
    ];
    let blob = manual_blob(2, 8, vec![-3, 17, 70], vec![200, 56], &symbols);
    assert_eq!(blob.payload_bits, 25);
    let bytes = blob.to_bytes().unwrap();
    assert_eq!(to_hex(&bytes), to_hex(&fixture("wnc_d2_b8.hex")));
    let parsed = EncodedBlob::from_bytes(&bytes).unwrap();
    assert_eq!(parsed, blob);
    assert_eq!(decode(&parsed).unwrap(), symbols);
}

#[test]
fn matches_reference_d3() {
    let symbols = [0, 0, 1, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 2, 0, 0, 1, 0, 0, 0, 0, 0, 0];
    let blob = manual_blob(3, 16, vec![100, -200, 300, -400, 500, -600, 700, -800], vec![40000, 20000, 5536], &symbols);
    assert_eq!(blob.payload_bits, 32);
    let bytes = blob.to_bytes().unwrap();
    assert_eq!(to_hex(&bytes), to_hex(&fixture("wnc_d3_b16.hex")));
    assert_eq!(decode(&EncodedBlob::from_bytes(&bytes).unwrap()).unwrap(), symbols);
}

fn pipeline_blob() -> Vec<u8> {
    let rho = DensityMatrix::diagonal(&[0.8, 0.15, 0.05]).unwrap();
    let est = quantize_estimate(&regularize(&rho, 0.01).unwrap(), 0.01, 32).unwrap();
    let symbols: Vec<u32> = (0..200u32).map(|i| [0, 0, 0, 1, 0, 2, 0, 1][(i * 5 % 8) as usize]).collect();
    encode(&symbols, &est).unwrap().to_bytes().unwrap()
}

#[test]
fn pipeline_regression_vector() {
    let bytes = pipeline_blob();
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline_d3_b32.hex");
    if std::env::var_os("REGENERATE_FIXTURES").is_some() {
        std::fs::write(&path, to_hex(&bytes) + "\n").unwrap();
    }
    assert_eq!(to_hex(&bytes), to_hex(&fixture("pipeline_d3_b32.hex")));
}

#[test]
fn corrupted_and_truncated_blobs_are_rejected() {
    let bytes = pipeline_blob();
    let mut bad = bytes.clone();
    bad[1] ^= 0xff;
    assert!(EncodedBlob::from_bytes(&bad).is_err());
    for cut in [1, 5, bytes.len() - 17] {
        assert!(EncodedBlob::from_bytes(&bytes[..bytes.len() - cut]).is_err());
    }
}
