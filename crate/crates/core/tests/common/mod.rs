//! Explicit finite-dimensional model of the leaky source, used as an oracle.
//!
//! Space: qubit (2) x polarization {H, V} (2) x Trojan {v, e_0Z, e_1Z, e_0X, e_0Y} (5).
//! An emitted state is
//! `(cos t |phi>|H> + sin t |phi>|V>) (T_I |v> + T_D |e_ja>)`
//! with orthonormal Trojan vectors. Bob and Eve together act through an
//! arbitrary operator `0 <= D <= I` on the whole space; the Pauli components
//! `q` of its restriction to the `(H, v)` qubit block are the transmission rates.
#![allow(dead_code)]

use num_complex::Complex64 as C;
use rand::Rng;
use rfiqkd::source::{build_flawed_states, theta_assignment, trojan_amplitudes, Basis, SourceSpec, ThetaMode};

pub const DIM: usize = 20;

pub type Vector = Vec<C>;
pub type Matrix = Vec<Vec<C>>;

pub fn index(qubit: usize, pol: usize, trojan: usize) -> usize {
    qubit + 2 * pol + 4 * trojan
}

/// Emitted states in `0Z, 1Z, 0X, 0Y` order.
pub fn emitted_vectors(spec: &SourceSpec) -> [Vector; 4] {
    let phis = build_flawed_states(spec);
    let thetas = theta_assignment(spec);
    let tr = trojan_amplitudes(spec.gamma).unwrap();
    std::array::from_fn(|k| {
        let mut v = vec![C::new(0.0, 0.0); DIM];
        let amps = phis[k].amplitudes();
        let (s, c) = thetas[k].sin_cos();
        for (q, a) in amps.iter().enumerate() {
            for (pol, pw) in [(0, c), (1, s)] {
                v[index(q, pol, 0)] += a * pw * tr.t_i;
                v[index(q, pol, k + 1)] += a * pw * tr.t_d;
            }
        }
        v
    })
}

/// Relative phase between the Z-basis branches for Alice's virtual outcome.
pub fn branch_phase(basis: Basis, bit: usize) -> C {
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    match basis {
        Basis::X => C::new(sign, 0.0),
        Basis::Y => C::new(0.0, sign),
        Basis::Z => panic!("no virtual Z branch"),
    }
}

/// Unnormalized `|Psi_0Z> + w |Psi_1Z>`.
pub fn virtual_vector(spec: &SourceSpec, basis: Basis, bit: usize) -> Vector {
    let [z0, z1, _, _] = emitted_vectors(spec);
    let w = branch_phase(basis, bit);
    z0.iter().zip(&z1).map(|(a, b)| a + w * b).collect()
}

pub fn norm_sqr(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Squared norms of the `(H, v)` qubit block and of everything else.
pub fn split_norms(v: &[C]) -> (f64, f64) {
    let block: f64 = (0..2).map(|q| v[index(q, 0, 0)].norm_sqr()).sum();
    (block, norm_sqr(v) - block)
}

/// Squared norm of the `(V, any)` part and of the `(H, tagged)` part.
pub fn off_and_tagged_norms(v: &[C]) -> (f64, f64) {
    let mut off = 0.0;
    let mut tagged = 0.0;
    for q in 0..2 {
        for t in 0..5 {
            off += v[index(q, 1, t)].norm_sqr();
            if t > 0 {
                tagged += v[index(q, 0, t)].norm_sqr();
            }
        }
    }
    (off, tagged)
}

pub fn expectation(d: &Matrix, v: &[C]) -> f64 {
    let mut acc = C::new(0.0, 0.0);
    for (i, row) in d.iter().enumerate() {
        let dv: C = row.iter().zip(v).map(|(a, b)| a * b).sum();
        acc += v[i].conj() * dv;
    }
    acc.re
}

/// Pauli components of the `(H, v)` block: `D_block = q_I I + q . sigma`.
pub fn block_q(d: &Matrix) -> [f64; 4] {
    let (i0, i1) = (index(0, 0, 0), index(1, 0, 0));
    let d00 = d[i0][i0].re;
    let d11 = d[i1][i1].re;
    let d01 = d[i0][i1];
    [0.5 * (d00 + d11), d01.re, -d01.im, 0.5 * (d00 - d11)]
}

fn random_complex_vector(rng: &mut impl Rng, n: usize) -> Vector {
    (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn normalized(v: Vector) -> Vector {
    let n = norm_sqr(&v).sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Orthonormal columns by Gram-Schmidt on random vectors.
pub fn random_orthonormal(rng: &mut impl Rng, count: usize) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::with_capacity(count);
    while basis.len() < count {
        let mut v = random_complex_vector(rng, DIM);
        for u in &basis {
            let overlap: C = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(u) {
                *x -= overlap * y;
            }
        }
        if norm_sqr(&v) > 1e-6 {
            basis.push(normalized(v));
        }
    }
    basis
}

/// `sum_k w_k |u_k><u_k|` for orthonormal `u_k`; `0 <= D <= I` when `w_k` lie in `[0, 1]`.
pub fn spectral(vectors: &[Vector], weights: &[f64]) -> Matrix {
    let mut d = vec![vec![C::new(0.0, 0.0); DIM]; DIM];
    for (u, w) in vectors.iter().zip(weights) {
        for i in 0..DIM {
            for j in 0..DIM {
                d[i][j] += u[i] * u[j].conj() * *w;
            }
        }
    }
    d
}

/// A random operator `0 <= D <= I`, drawn from a few families that stress
/// different parts of the bounds.
pub fn random_operator(rng: &mut impl Rng, emitted: &[Vector; 4]) -> Matrix {
    let scale = if rng.gen_bool(0.5) { 1.0 } else { 10f64.powf(rng.gen_range(-3.0..0.0)) };
    match rng.gen_range(0..4) {
        // Generic spectrum.
        0 => {
            let u = random_orthonormal(rng, DIM);
            let w: Vec<f64> = (0..DIM).map(|_| scale * rng.gen_range(0.0..1.0)).collect();
            spectral(&u, &w)
        }
        // Random projector.
        1 => {
            let k = rng.gen_range(1..DIM);
            let u = random_orthonormal(rng, k);
            spectral(&u, &vec![scale; k])
        }
        // Projector onto a superposition of an emitted state's qubit block and its remainder.
        2 => {
            let st = &emitted[rng.gen_range(0..4)];
            let mut block = vec![C::new(0.0, 0.0); DIM];
            let mut rest = st.clone();
            for q in 0..2 {
                let i = index(q, 0, 0);
                block[i] = st[i];
                rest[i] = C::new(0.0, 0.0);
            }
            let phase = C::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
            let (nb, nr) = (norm_sqr(&block).sqrt(), norm_sqr(&rest).sqrt());
            let mix = rng.gen_range(0.0..1.0f64);
            let v: Vector = block
                .iter()
                .zip(&rest)
                .map(|(b, r)| {
                    let b = if nb > 0.0 { b / nb } else { *b };
                    let r = if nr > 0.0 { r / nr } else { *r };
                    b * mix.sqrt() + r * phase * (1.0 - mix).sqrt()
                })
                .collect();
            if norm_sqr(&v) < 1e-12 {
                return spectral(&random_orthonormal(rng, 1), &[scale]);
            }
            spectral(&[normalized(v)], &[scale])
        }
        // Lossy detector acting on the qubit only, identical on every other mode.
        _ => {
            let dir = normalized(random_complex_vector(rng, 2));
            let mut d = vec![vec![C::new(0.0, 0.0); DIM]; DIM];
            for pol in 0..2 {
                for t in 0..5 {
                    for a in 0..2 {
                        for b in 0..2 {
                            d[index(a, pol, t)][index(b, pol, t)] = scale * dir[a] * dir[b].conj();
                        }
                    }
                }
            }
            d
        }
    }
}

pub fn random_spec(rng: &mut impl Rng) -> SourceSpec {
    let mut d = || rng.gen_range(-0.1..0.1);
    let (im1, im2, bs1, bs2, pm1, pm2) = (d(), d(), d(), d(), d(), d());
    let theta = rng.gen_range(0.0..0.05);
    SourceSpec {
        delta_im1: im1,
        delta_im2: im2,
        delta_bs1: bs1,
        delta_bs2: bs2,
        delta_pm1: pm1,
        delta_pm2: pm2,
        theta_mode: if rng.gen_bool(0.5) { ThetaMode::Independent(theta) } else { ThetaMode::Dependent(theta) },
        gamma: if rng.gen_bool(0.2) { 0.0 } else { 10f64.powf(rng.gen_range(-8.0..-2.0)) },
    }
}
