//! Recovery-quality metrics.
//!
//! The central quantity is the decode residual: encode a message state that
//! may be entangled with a reference register, push it through the channel's
//! isometric dilation, apply the decoder, and measure the Euclidean distance
//! to the ideal outcome `|phi> ⊗ |c>` (message restored, error/environment
//! registers in the channel's coefficient state). For a code certified at
//! `delta < 1` this residual never exceeds `delta`, for every state and
//! every channel in the span.
//!
//! The entangled-input trace distance lower-bounds the diamond-norm
//! disturbance of the composed encode-noise-decode channel; together with
//! the certified `delta` as upper bound it brackets the true disturbance
//! without any semidefinite programming.

use num_complex::Complex64;
use serde::Serialize;

use crate::codes::CodeSample;
use crate::decoder::Decoder;
use crate::linalg::{hermitian_eigen, re_hermitize, ComplexMatrix};
use crate::noise::NoiseChannel;
use crate::seeding::{random_unit_vector, rng_from_seed};
use crate::{Error, Result};

/// Bracket of the disturbance for one (code, decoder, channel) instance.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DisturbanceReport {
    /// Largest decode residual `|| D E_N V |phi> - |phi>|c> ||` over the
    /// tested states.
    pub residual_max: f64,
    /// Half trace distance between the decoded and original maximally
    /// entangled state; a lower bound on the disturbance.
    pub entangled_trace_dist: f64,
    /// Certified delta of the decoder; an upper bound on the disturbance.
    pub upper_bound: f64,
    pub num_states: usize,
    /// Set when a reported value had to be clamped into [0, 1] by more than
    /// floating-point noise.
    pub clamped: bool,
}

fn check_instance(dec: &Decoder, code: &CodeSample, ch: &NoiseChannel) -> Result<()> {
    if dec.n_dim() != code.big_dim()
        || dec.code_dim() != code.code_dim()
        || ch.dim() != code.big_dim()
        || dec.set_size() != ch.set().len()
    {
        return Err(Error::ShapeMismatch(format!(
            "instance mismatch: decoder ({}, {}, {}), code ({}, {}), channel (N={}, m={})",
            dec.n_dim(),
            dec.code_dim(),
            dec.set_size(),
            code.big_dim(),
            code.code_dim(),
            ch.dim(),
            ch.set().len()
        )));
    }
    Ok(())
}

/// Decode residual for one input state `phi` living on the message register
/// times an ancilla of dimension `phi.len() / K`.
///
/// Register layout (leftmost factor fastest): the pushed-through state is
/// indexed `(message j, error index i, environment r, ancilla b)` and the
/// ideal outcome is `phi[b*K + j] * c[r*m + i]`.
pub fn decode_residual(
    dec: &Decoder,
    code: &CodeSample,
    ch: &NoiseChannel,
    phi: &[Complex64],
) -> Result<f64> {
    check_instance(dec, code, ch)?;
    let k = code.code_dim();
    if phi.is_empty() || !phi.len().is_multiple_of(k) {
        return Err(Error::ShapeMismatch(format!(
            "state length {} is not a multiple of K = {k}",
            phi.len()
        )));
    }
    let norm: f64 = phi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(norm));
    }
    let anc = phi.len() / k;
    let n = code.big_dim();
    let m = ch.set().len();
    let r_count = ch.kraus_count();

    // Encode, dilate, decode (all as M ⊗ I on stacked registers).
    let mut encoded = vec![Complex64::ZERO; n * anc];
    code.encode_stacked(phi, &mut encoded);
    let mut dilated = vec![Complex64::ZERO; n * r_count * anc];
    ch.apply_dilation_stacked(&encoded, &mut dilated)?;
    let km = k * m;
    let mut decoded = vec![Complex64::ZERO; km * r_count * anc];
    dec.matrix().apply_stacked(&dilated, &mut decoded);

    let c = ch.coefficient_vector();
    let mut dist_sqr = 0.0f64;
    let mut idx = 0usize;
    for b in 0..anc {
        for r in 0..r_count {
            for i in 0..m {
                let ci = c[r * m + i];
                for j in 0..k {
                    let want = phi[b * k + j] * ci;
                    dist_sqr += (decoded[idx] - want).norm_sqr();
                    idx += 1;
                }
            }
        }
    }
    Ok(dist_sqr.sqrt())
}

/// Half trace distance between the decoded and original states on a
/// maximally entangled (message, reference) input, computed through the
/// pure-state dilation so only `K^2 x K^2` operators are ever materialized.
pub fn entangled_disturbance(
    dec: &Decoder,
    code: &CodeSample,
    ch: &NoiseChannel,
) -> Result<f64> {
    Ok(entangled_disturbance_raw(dec, code, ch)?.0)
}

fn entangled_disturbance_raw(
    dec: &Decoder,
    code: &CodeSample,
    ch: &NoiseChannel,
) -> Result<(f64, bool)> {
    check_instance(dec, code, ch)?;
    let k = code.code_dim();
    let n = code.big_dim();
    let m = ch.set().len();
    let km = k * m;
    let r_count = ch.kraus_count();

    // |Omega> = sum_j |j>|j> / sqrt(K), reference register outermost.
    let mut omega = vec![Complex64::ZERO; k * k];
    let amp = Complex64::new(1.0 / (k as f64).sqrt(), 0.0);
    for j in 0..k {
        omega[j * k + j] = amp;
    }

    let mut encoded = vec![Complex64::ZERO; n * k];
    code.encode_stacked(&omega, &mut encoded);
    let mut dilated = vec![Complex64::ZERO; n * r_count * k];
    ch.apply_dilation_stacked(&encoded, &mut dilated)?;
    let mut decoded = vec![Complex64::ZERO; km * r_count * k];
    dec.matrix().apply_stacked(&dilated, &mut decoded);

    // Success branch: trace out (error index, environment) from the decoded
    // pure state. sigma[(j,b),(j',b')] = sum_{i,r} w[j,i,r,b] conj(w[j',i,r,b']).
    let kk = k * k;
    let mut rho_out = ComplexMatrix::zeros(kk, kk);
    for b in 0..k {
        for bp in 0..k {
            for j in 0..k {
                for jp in 0..k {
                    let mut acc = Complex64::ZERO;
                    for r in 0..r_count {
                        for i in 0..m {
                            let x = decoded[(b * r_count + r) * km + i * k + j];
                            let y = decoded[(bp * r_count + r) * km + i * k + jp];
                            acc += x * y.conj();
                        }
                    }
                    rho_out.set(b * k + j, bp * k + jp, acc);
                }
            }
        }
    }

    // Failure branch: the reference-side state of the weight that fell
    // outside the decodable domain, tensored with the maximally mixed
    // message state. tau[b,b'] = <psi_b | psi_b'> - <w_b | w_b'>.
    let mut tau = ComplexMatrix::zeros(k, k);
    for b in 0..k {
        for bp in 0..k {
            let mut acc = Complex64::ZERO;
            for idx in 0..n * r_count {
                acc += dilated[b * n * r_count + idx] * dilated[bp * n * r_count + idx].conj();
            }
            for idx in 0..km * r_count {
                acc -= decoded[b * km * r_count + idx] * decoded[bp * km * r_count + idx].conj();
            }
            tau.set(b, bp, acc);
        }
    }
    let inv_k = 1.0 / k as f64;
    for b in 0..k {
        for bp in 0..k {
            for j in 0..k {
                let cur = rho_out.get(b * k + j, bp * k + j);
                rho_out.set(b * k + j, bp * k + j, cur + tau.get(b, bp) * inv_k);
            }
        }
    }

    // Difference from the original entangled state.
    for j in 0..k {
        for jp in 0..k {
            let cur = rho_out.get(j * k + j, jp * k + jp);
            rho_out.set(j * k + j, jp * k + jp, cur - amp * amp);
        }
    }
    let raw = 0.5 * trace_norm_hermitian(&rho_out)?;
    let clamped = !(-1e-9..=1.0 + 1e-9).contains(&raw);
    Ok((raw.clamp(0.0, 1.0), clamped))
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(a: &ComplexMatrix) -> Result<f64> {
    let (vals, _) = hermitian_eigen(&re_hermitize(a), false)?;
    Ok(vals.iter().map(|v| v.abs()).sum())
}

/// Trace distance between two pure states, computed numerically in the
/// 2-dimensional span of the pair (independent of the closed-form
/// `2 sqrt(1 - |<u|v>|^2)`, which tests check against).
pub fn pure_state_trace_norm_diff(u: &[Complex64], v: &[Complex64]) -> f64 {
    assert_eq!(u.len(), v.len());
    let inner = crate::linalg::cdotc(u, v);
    // Orthonormal basis {u, e2} for span{u, v}.
    let mut w: Vec<Complex64> = v.iter().zip(u).map(|(x, y)| x - inner * y).collect();
    let w_norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if w_norm < 1e-15 {
        // Same ray: projectors coincide.
        return 0.0;
    }
    for z in w.iter_mut() {
        *z /= w_norm;
    }
    // v = inner * u + w_norm * e2; projectors in the 2D basis.
    let a = Complex64::new(1.0 - inner.norm_sqr(), 0.0);
    let c = -inner * w_norm;
    let b = Complex64::new(-w_norm * w_norm, 0.0);
    // diff = [[a, c], [conj(c), b]]; eigenvalues of a 2x2 Hermitian.
    let half_tr = 0.5 * (a.re + b.re);
    let det = a.re * b.re - c.norm_sqr();
    let disc = (half_tr * half_tr - det).max(0.0).sqrt();
    (half_tr + disc).abs() + (half_tr - disc).abs()
}

/// Aggregates decode residuals over Haar-random states with a K-dimensional
/// reference register, plus the maximally entangled input; brackets the true
/// disturbance between `entangled_trace_dist` and `upper_bound`.
pub fn disturbance_report(
    dec: &Decoder,
    code: &CodeSample,
    ch: &NoiseChannel,
    num_states: usize,
    seed: u64,
) -> Result<DisturbanceReport> {
    check_instance(dec, code, ch)?;
    let k = code.code_dim();
    let mut rng = rng_from_seed(seed);
    let mut residual_max = 0.0f64;
    for _ in 0..num_states {
        let phi = random_unit_vector(&mut rng, k * k);
        residual_max = residual_max.max(decode_residual(dec, code, ch, &phi)?);
    }
    let (entangled, clamped) = entangled_disturbance_raw(dec, code, ch)?;
    Ok(DisturbanceReport {
        residual_max,
        entangled_trace_dist: entangled,
        upper_bound: dec.delta_cert(),
        num_states,
        clamped,
    })
}
