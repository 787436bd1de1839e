//! Source coefficients and yield bounds against the explicit embedding.

mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rfiqkd::polytope::{dot, Interval};
use rfiqkd::source::{Basis, CoefficientSet, StateLabel};

const TOL: f64 = 1e-10;

#[test]
fn closed_forms_match_gram_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let spec = random_spec(&mut rng);
        let coeffs = CoefficientSet::build(&spec).unwrap();
        let emitted = emitted_vectors(&spec);
        for st in StateLabel::ALL {
            let v = &emitted[st.index()];
            let p = coeffs.practical[st.index()];
            let (block, _) = split_norms(v);
            let (off, tagged) = off_and_tagged_norms(v);
            assert!((norm_sqr(v) - 1.0).abs() < TOL);
            assert!((block - p.qubit_weight).abs() < TOL, "{st:?}");
            assert!((off - p.off_mode_weight).abs() < TOL);
            assert!((tagged - p.tagged_weight).abs() < TOL);
        }
        for basis in Basis::PHASE {
            for bit in 0..2 {
                let v = virtual_vector(&spec, basis, bit);
                let c = coeffs.virtual_branch(basis, bit);
                let (block, rest) = split_norms(&v);
                assert!((block - c.qubit_weight).abs() < TOL, "{basis:?}{bit}: {block} vs {}", c.qubit_weight);
                assert!((rest - c.off_weight).abs() < TOL);
                assert!((c.coherence - (block * rest).sqrt()).abs() < TOL);
                assert!((c.probability - norm_sqr(&v) / 4.0).abs() < TOL);
            }
            let total: f64 = (0..2).map(|b| coeffs.virtual_branch(basis, b).probability).sum();
            assert!((total - 1.0).abs() < TOL);
        }
    }
}

/// Each prepared state's yield splits into the qubit-block term and a
/// remainder; both the slack interval and the derived qubit-term range must hold.
#[test]
fn practical_slack_contains_remainder() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..2000 {
        let spec = random_spec(&mut rng);
        let coeffs = CoefficientSet::build(&spec).unwrap();
        let emitted = emitted_vectors(&spec);
        let d = random_operator(&mut rng, &emitted);
        let q = block_q(&d);
        for st in StateLabel::ALL {
            let p = coeffs.practical[st.index()];
            let y = expectation(&d, &emitted[st.index()]);
            let linear = p.qubit_weight * dot(&coeffs.states[st.index()].bloch.as_array(), &q);
            let r = y - linear;
            worst = worst.max((p.slack.0 - r).max(r - p.slack.1));
            let term = p.qubit_term_bounds(Interval::point(y));
            worst = worst.max((term.lo - linear).max(linear - term.hi));
        }
    }
    assert!(worst <= TOL, "remainder outside slack by {worst:e}");
}

#[test]
fn virtual_slack_contains_remainder() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..2000 {
        let spec = random_spec(&mut rng);
        let coeffs = CoefficientSet::build(&spec).unwrap();
        let d = random_operator(&mut rng, &emitted_vectors(&spec));
        let q = block_q(&d);
        for basis in Basis::PHASE {
            for bit in 0..2 {
                let c = coeffs.virtual_branch(basis, bit);
                let y = expectation(&d, &virtual_vector(&spec, basis, bit));
                let linear = dot(&c.objective(), &q);
                let r = y - linear;
                assert!(r >= c.slack.0 - TOL && r <= c.slack.1 + TOL, "{basis:?}{bit}: {r} not in {:?}", c.slack);
                let full = c.yield_bounds(Interval::point(linear));
                assert!(full.contains(y, TOL), "{basis:?}{bit}: {y} not in {full:?}");
            }
        }
    }
}
