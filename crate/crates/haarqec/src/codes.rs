//! Haar random codes: sampling encoding isometries and certifying how close
//! their shifted basis comes to an orthonormal system.
//!
//! The default sampler draws an `N x K` matrix of i.i.d. complex Gaussians
//! with variance `1/N` per entry and replaces its singular values by 1
//! ([`crate::linalg::isometrize`]); the result is Haar distributed. A
//! QR-based sampler with the positive-diagonal convention is provided as a
//! distributional cross-check.
//!
//! For an error set `{E_1..E_m}` and code matrix `V`, the shifted-basis
//! matrix is the `N x Km` column-block concatenation `[E_1 V | ... | E_m V]`
//! (column `i*K + j` holds `E_i |v_j>`). The code's empirical `delta` is the
//! isometry defect of that matrix, read off the extreme eigenvalues of its
//! Gram matrix.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::errorset::UnitaryErrorSet;
use crate::linalg::{
    axpy, cdotc, hermitian_eigen, isometrize, re_hermitize, vec_norm, ComplexMatrix,
    IsometryReport, SingularExtrema,
};
use crate::seeding::{complex_gaussian, rng_from_seed};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingMethod {
    #[serde(rename = "gaussian-isometrize")]
    GaussianIsometrize,
    #[serde(rename = "qr-haar")]
    QrHaar,
}

/// A sampled encoding isometry with its provenance.
#[derive(Clone, Debug)]
pub struct CodeSample {
    big_dim: usize,
    code_dim: usize,
    matrix: ComplexMatrix,
    seed: u64,
    method: SamplingMethod,
}

impl CodeSample {
    pub fn from_parts(
        matrix: ComplexMatrix,
        seed: u64,
        method: SamplingMethod,
    ) -> Result<Self> {
        let (n, k) = (matrix.rows(), matrix.cols());
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!(
                "code dimension {k} must satisfy 1 <= K <= N = {n}"
            )));
        }
        let defect = isometry_defect(&matrix);
        if defect > 1e-10 {
            return Err(Error::Format(format!(
                "code matrix is not an isometry: max |V^H V - I| = {defect:.3e}"
            )));
        }
        Ok(CodeSample {
            big_dim: n,
            code_dim: k,
            matrix,
            seed,
            method,
        })
    }

    #[inline]
    pub fn big_dim(&self) -> usize {
        self.big_dim
    }

    #[inline]
    pub fn code_dim(&self) -> usize {
        self.code_dim
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn method(&self) -> SamplingMethod {
        self.method
    }

    /// Encodes a message-register state (possibly with extra registers
    /// stacked after it): applies `V ⊗ I`.
    pub fn encode_stacked(&self, src: &[Complex64], dst: &mut [Complex64]) {
        self.matrix.apply_stacked(src, dst);
    }
}

fn isometry_defect(v: &ComplexMatrix) -> f64 {
    let k = v.cols();
    let mut worst = 0.0f64;
    for j in 0..k {
        for i in 0..=j {
            let g = cdotc(v.col(i), v.col(j));
            let want = if i == j { Complex64::ONE } else { Complex64::ZERO };
            worst = worst.max((g - want).norm());
        }
    }
    worst
}

/// `N x K` matrix of i.i.d. complex Gaussians, mean zero, variance `1/N`
/// per entry. Entries are drawn column by column, so a fixed seed produces a
/// bit-identical matrix.
pub fn sample_gaussian(n: usize, k: usize, seed: u64) -> Result<ComplexMatrix> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= K <= N, got K={k}, N={n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let variance = 1.0 / n as f64;
    let mut m = ComplexMatrix::zeros(n, k);
    for j in 0..k {
        for z in m.col_mut(j).iter_mut() {
            *z = complex_gaussian(&mut rng, variance);
        }
    }
    Ok(m)
}

/// Haar random isometry via the Gaussian + isometrize route (the default
/// sampler). Rank deficiency of the Gaussian draw has probability zero; if
/// it ever fires, resample with a different seed.
pub fn sample_haar_isometry(n: usize, k: usize, seed: u64) -> Result<CodeSample> {
    let g = sample_gaussian(n, k, seed)?;
    let v = isometrize(&g)?;
    CodeSample::from_parts(v, seed, SamplingMethod::GaussianIsometrize)
}

/// Haar random isometry via Gram-Schmidt QR of the same Gaussian ensemble.
/// Normalizing against a positive real R-diagonal is exactly the phase
/// convention that makes the Q factor Haar distributed; kept as an
/// independent cross-check of the default sampler.
pub fn sample_haar_qr(n: usize, k: usize, seed: u64) -> Result<CodeSample> {
    let g = sample_gaussian(n, k, seed)?;
    let mut cols: Vec<Vec<Complex64>> = (0..k).map(|j| g.col(j).to_vec()).collect();
    for j in 0..k {
        // Two orthogonalization passes keep the columns orthonormal to
        // machine precision even for unlucky draws.
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let proj = cdotc(&head[i], &tail[0]);
                axpy(-proj, &head[i], &mut tail[0]);
            }
        }
        let norm = vec_norm(&cols[j]);
        if norm < 1e-12 {
            return Err(Error::RankDeficient {
                s_min: norm,
                threshold: 1e-12,
            });
        }
        let inv = Complex64::new(1.0 / norm, 0.0);
        for z in cols[j].iter_mut() {
            *z *= inv;
        }
    }
    let refs: Vec<&[Complex64]> = cols.iter().map(|c| c.as_slice()).collect();
    CodeSample::from_parts(
        ComplexMatrix::from_columns(n, &refs),
        seed,
        SamplingMethod::QrHaar,
    )
}

/// Shifted-basis matrix `[E_1 M | ... | E_m M]` of an arbitrary `N x K`
/// matrix (column `i*K + j` is `E_i` applied to column `j` of `M`). Works on
/// raw Gaussian draws as well as code samples.
pub fn shifted_basis_from_matrix(
    m: &ComplexMatrix,
    set: &UnitaryErrorSet,
) -> Result<ComplexMatrix> {
    if set.dim() != m.rows() {
        return Err(Error::ShapeMismatch(format!(
            "error set dimension {} does not match matrix rows {}",
            set.dim(),
            m.rows()
        )));
    }
    let k = m.cols();
    let mut y = ComplexMatrix::zeros(m.rows(), k * set.len());
    for (i, op) in set.ops().iter().enumerate() {
        // Monomial forms make each column O(N).
        let mono = op.as_monomial();
        for j in 0..k {
            let target_index = i * k + j;
            match &mono {
                Some(mo) => mo.apply_into(m.col(j), y.col_mut(target_index))?,
                None => {
                    let col = op.apply_vec(m.col(j))?;
                    y.col_mut(target_index).copy_from_slice(&col);
                }
            }
        }
    }
    Ok(y)
}

/// Shifted basis of a code sample (`Y = [E_1 V | ... | E_m V]`). Callers in
/// the quantum Hamming regime have `Km <= N`; larger sets still build, the
/// certification then reports `delta >= 1`.
pub fn shifted_basis_matrix(
    sample: &CodeSample,
    set: &UnitaryErrorSet,
) -> Result<ComplexMatrix> {
    shifted_basis_from_matrix(sample.matrix(), set)
}

/// Gram matrix of the shifted basis, `Y^H Y`, without materializing `Y` when
/// it would exceed `element_cap` entries: columns are regenerated in blocks
/// and dotted pairwise.
pub fn shifted_gram(
    m: &ComplexMatrix,
    set: &UnitaryErrorSet,
    element_cap: usize,
) -> Result<ComplexMatrix> {
    let n = m.rows();
    let k = m.cols();
    let total = k * set.len();
    if n.checked_mul(total).is_some_and(|e| e <= element_cap) {
        let y = shifted_basis_from_matrix(m, set)?;
        return Ok(re_hermitize(&y.gram()));
    }

    // Block accumulation: hold at most two column blocks at a time.
    let block = (element_cap / (2 * n)).max(1).min(total);
    let gen_block = |start: usize, len: usize| -> Result<ComplexMatrix> {
        let mut cols = ComplexMatrix::zeros(n, len);
        for c in 0..len {
            let idx = start + c;
            let (i, j) = (idx / k, idx % k);
            let col = set.op(i).apply_vec(m.col(j))?;
            cols.col_mut(c).copy_from_slice(&col);
        }
        Ok(cols)
    };
    let mut g = ComplexMatrix::zeros(total, total);
    let mut bi = 0;
    while bi < total {
        let li = block.min(total - bi);
        let left = gen_block(bi, li)?;
        // Diagonal block.
        for a in 0..li {
            for b in a..li {
                let v = cdotc(left.col(a), left.col(b));
                g.set(bi + a, bi + b, v);
                g.set(bi + b, bi + a, v.conj());
            }
        }
        let mut bj = bi + li;
        while bj < total {
            let lj = block.min(total - bj);
            let right = gen_block(bj, lj)?;
            for a in 0..li {
                for b in 0..lj {
                    let v = cdotc(left.col(a), right.col(b));
                    g.set(bi + a, bj + b, v);
                    g.set(bj + b, bi + a, v.conj());
                }
            }
            bj += lj;
        }
        bi += li;
    }
    Ok(re_hermitize(&g))
}

/// Nondegeneracy certificate for a (code, error set) pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NondegeneracyReport {
    /// Isometry defect of the shifted basis; `report.delta` is the code's
    /// empirical delta.
    pub report: IsometryReport,
    pub delta_emp: f64,
    /// Leading-order prediction `sqrt(Km / N)`.
    pub delta_pred_leading: f64,
    pub km: usize,
}

impl NondegeneracyReport {
    /// True when `Km > N`, which forces `delta_emp >= 1` by rank counting.
    pub fn hamming_violated(&self) -> bool {
        self.km > self.report.rows
    }
}

/// Builds the certificate from precomputed Gram eigenvalues (ascending), so
/// callers that also need eigenvectors can share one decomposition.
pub fn report_from_gram_eigenvalues(
    vals: &[f64],
    n: usize,
    k: usize,
    m: usize,
) -> NondegeneracyReport {
    let extrema = SingularExtrema {
        s_min: vals.first().copied().unwrap_or(0.0).max(0.0).sqrt(),
        s_max: vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
    };
    let report = IsometryReport::from_extrema(extrema, n, k * m);
    NondegeneracyReport {
        report,
        delta_emp: report.delta,
        delta_pred_leading: ((k * m) as f64 / n as f64).sqrt(),
        km: k * m,
    }
}

/// Full singular spectrum of the shifted basis (ascending), for
/// diagnostics; certification itself needs only the extremes.
pub fn shifted_singular_spectrum(
    sample: &CodeSample,
    set: &UnitaryErrorSet,
    element_cap: usize,
) -> Result<Vec<f64>> {
    let gram = shifted_gram(sample.matrix(), set, element_cap)?;
    let (vals, _) = hermitian_eigen(&gram, false)?;
    Ok(vals.iter().map(|&l| l.max(0.0).sqrt()).collect())
}

/// [`report_from_gram_eigenvalues`] with dimensions read off an instance.
pub fn report_from_sample(
    vals: &[f64],
    sample: &CodeSample,
    set: &UnitaryErrorSet,
) -> NondegeneracyReport {
    report_from_gram_eigenvalues(vals, sample.big_dim(), sample.code_dim(), set.len())
}

/// Certifies the shifted basis of `sample` against `set`: the empirical
/// delta from the extreme singular values plus the leading-order prediction.
pub fn nondegeneracy_report(
    sample: &CodeSample,
    set: &UnitaryErrorSet,
    element_cap: usize,
) -> Result<NondegeneracyReport> {
    let gram = shifted_gram(sample.matrix(), set, element_cap)?;
    let (vals, _) = hermitian_eigen(&gram, false)?;
    Ok(report_from_gram_eigenvalues(
        &vals,
        sample.big_dim(),
        sample.code_dim(),
        set.len(),
    ))
}

// ---------------------------------------------------------------------------
// Binary code file format
// ---------------------------------------------------------------------------

const MAGIC: &[u8; 8] = b"HAARQEC1";

#[derive(Serialize, Deserialize)]
struct Sidecar {
    seed: u64,
    sampling_method: SamplingMethod,
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    os.into()
}

/// Writes any matrix in the code-file byte layout: 8-byte magic, the two
/// dimensions as little-endian u64, then the entries as little-endian f64
/// pairs (column-major, re/im interleaved). Also used to dump decoders,
/// whose dimensions are (Km, N).
pub fn write_matrix_file(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(MAGIC)?;
    f.write_all(&(m.rows() as u64).to_le_bytes())?;
    f.write_all(&(m.cols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.data().len() * 16);
    for z in m.data() {
        buf.extend_from_slice(&z.re.to_le_bytes());
        buf.extend_from_slice(&z.im.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Writes the code matrix via [`write_matrix_file`] plus a JSON sidecar at
/// `<path>.json` recording the seed and sampling method.
pub fn write_code_file(path: &Path, sample: &CodeSample) -> Result<()> {
    write_matrix_file(path, sample.matrix())?;
    let sidecar = Sidecar {
        seed: sample.seed(),
        sampling_method: sample.method(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

/// Reads a code file plus its sidecar, re-checking the isometry invariant.
pub fn read_code_file(path: &Path) -> Result<CodeSample> {
    let mut f = fs::File::open(path)?;
    let mut magic = [0u8; 8];
    f.read_exact(&mut magic)
        .map_err(|_| Error::Format("file too short for magic".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected \"HAARQEC1\"",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut u64buf = [0u8; 8];
    f.read_exact(&mut u64buf)?;
    let n = u64::from_le_bytes(u64buf) as usize;
    f.read_exact(&mut u64buf)?;
    let k = u64::from_le_bytes(u64buf) as usize;
    if k == 0 || k > n {
        return Err(Error::Format(format!("bad dimensions N={n}, K={k}")));
    }
    let mut data = Vec::with_capacity(n * k);
    let mut pair = [0u8; 16];
    for _ in 0..n * k {
        f.read_exact(&mut pair)
            .map_err(|_| Error::Format("file truncated".into()))?;
        let re = f64::from_le_bytes(pair[0..8].try_into().unwrap());
        let im = f64::from_le_bytes(pair[8..16].try_into().unwrap());
        data.push(Complex64::new(re, im));
    }
    let matrix = ComplexMatrix::from_vec(n, k, data)?;
    let raw = fs::read(sidecar_path(path))
        .map_err(|_| Error::Format("missing sidecar JSON (expected <file>.json)".into()))?;
    let sidecar: Sidecar = serde_json::from_slice(&raw)?;
    CodeSample::from_parts(matrix, sidecar.seed, sidecar.sampling_method)
}
