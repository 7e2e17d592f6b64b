//! Little-endian binary containers, CSV exports and atomic file writes.
//!
//! | magic  | layout                                                      |
//! |--------|-------------------------------------------------------------|
//! | `IFN1` | u64 N, u64 M, M blocks of (left N complex, right N complex) |
//! | `IFD1` | u64 M, M complex                                            |
//! | `IFM1` | u64 N, N² complex, row-major                                |
//! | `IFS1` | u64 N, N complex                                            |
//!
//! A complex value is two f64 (real, imaginary).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::PhaseTransitionResult;
use crate::gwf::TraceRecord;
use crate::lrmr::LiftedRecord;
use crate::measurement::{ComplexSignal, InterferometricData, LiftedMatrix, MeasurementEnsemble};
use crate::radar::ComparisonRow;
use crate::theory::RecoveryConstants;

pub const ENSEMBLE_MAGIC: &[u8; 4] = b"IFN1";
pub const DATA_MAGIC: &[u8; 4] = b"IFD1";
pub const MATRIX_MAGIC: &[u8; 4] = b"IFM1";
pub const SIGNAL_MAGIC: &[u8; 4] = b"IFS1";

/// Writes `bytes` to a temporary sibling and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn push_complex(out: &mut Vec<u8>, z: Complex64) {
    out.extend_from_slice(&z.re.to_le_bytes());
    out.extend_from_slice(&z.im.to_le_bytes());
}

fn push_header(out: &mut Vec<u8>, magic: &[u8; 4], dims: &[usize]) {
    out.extend_from_slice(magic);
    for &d in dims {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn err(&self, offset: usize, message: impl Into<String>) -> Error {
        Error::Format {
            offset: offset as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, len: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(self.err(
                self.pos,
                format!("truncated {what}: need {len} bytes, {} remain", self.bytes.len() - self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != expected {
            return Err(self.err(
                0,
                format!(
                    "bad magic: expected {:?}, found {:?}",
                    String::from_utf8_lossy(expected),
                    String::from_utf8_lossy(got)
                ),
            ));
        }
        Ok(())
    }

    fn dim(&mut self, what: &str) -> Result<usize> {
        let at = self.pos;
        let b = self.take(8, what)?;
        let v = u64::from_le_bytes(b.try_into().expect("8 bytes"));
        if v == 0 {
            return Err(self.err(at, format!("{what} must be >= 1")));
        }
        usize::try_from(v).map_err(|_| self.err(at, format!("{what} = {v} too large")))
    }

    fn complex_vec(&mut self, count: usize, what: &str) -> Result<Vec<Complex64>> {
        let len = count
            .checked_mul(16)
            .ok_or_else(|| self.err(self.pos, format!("{what} size overflows")))?;
        let start = self.pos;
        let raw = self.take(len, what)?;
        raw.chunks_exact(16)
            .enumerate()
            .map(|(i, c)| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                if re.is_finite() && im.is_finite() {
                    Ok(Complex64::new(re, im))
                } else {
                    Err(self.err(start + 16 * i, format!("non-finite value in {what}")))
                }
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.err(
                self.pos,
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

pub fn encode_ensemble(ens: &MeasurementEnsemble) -> Vec<u8> {
    let (n, m) = (ens.n(), ens.m());
    let mut out = Vec::with_capacity(20 + 32 * n * m);
    push_header(&mut out, ENSEMBLE_MAGIC, &[n, m]);
    for k in 0..m {
        for &z in ens.left(k).iter().chain(ens.right(k)) {
            push_complex(&mut out, z);
        }
    }
    out
}

/// Decodes an ensemble. Files whose left and right blocks coincide load as
/// auto-correlation ensembles.
pub fn decode_ensemble(bytes: &[u8]) -> Result<MeasurementEnsemble> {
    let mut r = Reader::new(bytes);
    r.magic(ENSEMBLE_MAGIC)?;
    let n = r.dim("N")?;
    let m = r.dim("M")?;
    let mut left = Vec::with_capacity(n.saturating_mul(m).min(1 << 24));
    let mut right = Vec::with_capacity(n.saturating_mul(m).min(1 << 24));
    for _ in 0..m {
        left.extend(r.complex_vec(n, "left vector")?);
        right.extend(r.complex_vec(n, "right vector")?);
    }
    r.finish()?;
    if left == right {
        MeasurementEnsemble::phase_retrieval(n, left)
    } else {
        MeasurementEnsemble::interferometric(n, left, right)
    }
}

pub fn encode_data(data: &InterferometricData) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 16 * data.len());
    push_header(&mut out, DATA_MAGIC, &[data.len()]);
    data.as_slice().iter().for_each(|&z| push_complex(&mut out, z));
    out
}

pub fn decode_data(bytes: &[u8]) -> Result<InterferometricData> {
    let mut r = Reader::new(bytes);
    r.magic(DATA_MAGIC)?;
    let m = r.dim("M")?;
    let v = r.complex_vec(m, "data")?;
    r.finish()?;
    InterferometricData::new(v)
}

pub fn encode_matrix(x: &LiftedMatrix) -> Vec<u8> {
    let n = x.n();
    let mut out = Vec::with_capacity(12 + 16 * n * n);
    push_header(&mut out, MATRIX_MAGIC, &[n]);
    for i in 0..n {
        for j in 0..n {
            push_complex(&mut out, x.matrix()[(i, j)]);
        }
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<LiftedMatrix> {
    let mut r = Reader::new(bytes);
    r.magic(MATRIX_MAGIC)?;
    let n = r.dim("N")?;
    let count = n
        .checked_mul(n)
        .ok_or_else(|| r.err(4, "matrix size overflows"))?;
    let v = r.complex_vec(count, "matrix")?;
    r.finish()?;
    LiftedMatrix::new(DMatrix::from_row_slice(n, n, &v))
}

pub fn encode_signal(s: &ComplexSignal) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 16 * s.len());
    push_header(&mut out, SIGNAL_MAGIC, &[s.len()]);
    s.as_slice().iter().for_each(|&z| push_complex(&mut out, z));
    out
}

pub fn decode_signal(bytes: &[u8]) -> Result<ComplexSignal> {
    let mut r = Reader::new(bytes);
    r.magic(SIGNAL_MAGIC)?;
    let n = r.dim("N")?;
    let v = r.complex_vec(n, "signal")?;
    r.finish()?;
    ComplexSignal::new(v)
}

pub fn write_ensemble(path: &Path, ens: &MeasurementEnsemble) -> Result<()> {
    write_atomic(path, &encode_ensemble(ens))
}

pub fn read_ensemble(path: &Path) -> Result<MeasurementEnsemble> {
    decode_ensemble(&read_file(path)?)
}

pub fn write_data(path: &Path, data: &InterferometricData) -> Result<()> {
    write_atomic(path, &encode_data(data))
}

pub fn read_data(path: &Path) -> Result<InterferometricData> {
    decode_data(&read_file(path)?)
}

pub fn write_matrix(path: &Path, x: &LiftedMatrix) -> Result<()> {
    write_atomic(path, &encode_matrix(x))
}

pub fn read_matrix(path: &Path) -> Result<LiftedMatrix> {
    decode_matrix(&read_file(path)?)
}

pub fn write_signal(path: &Path, s: &ComplexSignal) -> Result<()> {
    write_atomic(path, &encode_signal(s))
}

pub fn read_signal(path: &Path) -> Result<ComplexSignal> {
    decode_signal(&read_file(path)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `index,re,im`.
pub fn complex_csv(values: &[Complex64]) -> String {
    let mut s = String::from("index,re,im\n");
    for (i, z) in values.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{}", z.re, z.im);
    }
    s
}

/// `k,objective,step,flops,dist,rel_err`; distances are empty without a truth.
pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut s = String::from("k,objective,step,flops,dist,rel_err\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.k,
            r.objective,
            r.step,
            r.flops,
            opt(r.dist),
            opt(r.rel_err)
        );
    }
    s
}

/// `k,lifted_mse,signal_mse,residual,flops`.
pub fn lifted_trace_csv(records: &[LiftedRecord]) -> String {
    let mut s = String::from("k,lifted_mse,signal_mse,residual,flops\n");
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.k,
            opt(r.lifted_mse),
            opt(r.signal_mse),
            r.residual,
            r.flops
        );
    }
    s
}

/// `oversampling,trials,p_success_1e5,p_success_1e3`.
pub fn phase_transition_csv(result: &PhaseTransitionResult) -> String {
    let mut s = String::from("oversampling,trials,p_success_1e5,p_success_1e3\n");
    for r in &result.rows {
        let _ = writeln!(s, "{},{},{},{}", r.oversampling, r.trials, r.p_strict(), r.p_moderate());
    }
    s
}

/// `delta1,epsilon,delta2,c,h`.
pub fn constants_csv(rows: &[RecoveryConstants]) -> String {
    let mut s = String::from("delta1,epsilon,delta2,c,h\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.delta1, r.epsilon, r.delta2, r.c, r.h);
    }
    s
}

/// `method,flops,lifted_mse,signal_mse`.
pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from("method,flops,lifted_mse,signal_mse\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.method, r.flops, r.lifted_mse, r.signal_mse);
    }
    s
}

/// Image as `ny` lines of `nx` comma-separated values.
pub fn image_csv(image: &[f64], nx: usize) -> String {
    let mut s = String::new();
    for row in image.chunks(nx.max(1)) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Binary greymap (P5), rows top to bottom, the maximum mapped to 255; an
/// all-zero image maps to 0.
pub fn image_pgm(image: &[f64], nx: usize, ny: usize) -> Result<Vec<u8>> {
    if image.len() != nx * ny {
        return Err(Error::dim("image pixels", nx * ny, image.len()));
    }
    let max = image.iter().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
    out.extend(image.iter().map(|&v| {
        if max > 0.0 {
            (v.max(0.0) / max * 255.0).round() as u8
        } else {
            0
        }
    }));
    Ok(out)
}
