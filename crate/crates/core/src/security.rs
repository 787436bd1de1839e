//! Phase-error and coherence bounds for the four-state protocol.
//!
//! Bob's effective measurement operator for outcome `s` in basis `beta` is
//! known only through its Pauli components `q = (q_I, q_X, q_Y, q_Z)` on the
//! Trojan-free qubit subspace. Each prepared state constrains `q` to a slab
//!
//! ```text
//! u_lo <= qubit_weight * (V . q) <= u_hi
//! ```
//!
//! where `[u_lo, u_hi]` accounts for the off-mode and tagged components (see
//! [`PracticalCoefficients::qubit_term_bounds`]). Together with
//! `|q_t| <= min(q_I, 1 - q_I)` (a linear relaxation of `0 <= D <= I`) this
//! gives a polytope. Virtual yields are then bounded by optimizing over it and
//! accounting for the virtual remainder the same way, and the virtual bit
//! error gives the phase error.

use crate::channel::YieldTable;
use crate::error::{Error, Result};
use crate::polytope::{det4, extrema_over, HalfSpace, Interval, Polytope, DIM};
use crate::qubit::binary_entropy;
use crate::source::{Basis, CoefficientSet, StateLabel, VirtualCoefficients};
#[cfg(doc)]
use crate::source::PracticalCoefficients;

/// The Eve-information bound is valid only for Z-basis error bounds below this.
pub const E_ZZ_ABORT_THRESHOLD: f64 = 0.159;

const YIELD_TOL: f64 = 1e-12;

/// Single-photon yield intervals per `(state, bob basis, outcome)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldBounds {
    pub lo: YieldTable,
    pub hi: YieldTable,
}

impl YieldBounds {
    pub fn exact(table: &YieldTable) -> Self {
        YieldBounds { lo: *table, hi: *table }
    }

    pub fn get(&self, state: StateLabel, basis: Basis, outcome: usize) -> Interval {
        Interval::new(self.lo.get(state, basis, outcome), self.hi.get(state, basis, outcome))
    }

    pub fn validate(&self) -> Result<()> {
        for ((st, b, s, lo), (_, _, _, hi)) in self.lo.iter().zip(self.hi.iter()) {
            let ok = lo.is_finite()
                && hi.is_finite()
                && lo >= -YIELD_TOL
                && hi <= 1.0 + YIELD_TOL
                && lo <= hi + YIELD_TOL;
            if !ok {
                return Err(Error::Input(format!(
                    "yield interval [{lo}, {hi}] for state {} basis {b:?} outcome {s} is not inside [0, 1]",
                    st.name()
                )));
            }
        }
        Ok(())
    }
}

/// Linear constraints on `q` for Bob's outcome `outcome` in `bob_basis`.
pub fn build_inequality_system(
    coeffs: &CoefficientSet,
    yields: &YieldBounds,
    bob_basis: Basis,
    outcome: usize,
) -> Result<Polytope> {
    yields.validate()?;
    let rows: [[f64; DIM]; 4] = StateLabel::ALL.map(|st| {
        let w = coeffs.practical[st.index()].qubit_weight;
        coeffs.states[st.index()].bloch.as_array().map(|v| w * v)
    });
    let scale: f64 = rows.iter().map(|r| r.iter().map(|c| c * c).sum::<f64>().sqrt()).product();
    let det = det4(&rows);
    if !(det.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE)) || scale == 0.0 {
        return Err(Error::Degenerate(format!(
            "prepared states do not span the Bloch space (det {det:.3e})"
        )));
    }

    let mut constraints = Vec::with_capacity(20);
    for st in StateLabel::ALL {
        let term = coeffs.practical[st.index()].qubit_term_bounds(yields.get(st, bob_basis, outcome));
        constraints.extend(HalfSpace::two_sided(rows[st.index()], term.lo, term.hi));
    }
    // |q_t| <= q_I and |q_t| <= 1 - q_I
    for t in 1..DIM {
        for sign in [1.0, -1.0] {
            let mut a = [0.0; DIM];
            a[t] = sign;
            a[0] = -1.0;
            constraints.push(HalfSpace::new(a, 0.0));
            a[0] = 1.0;
            constraints.push(HalfSpace::new(a, 1.0));
        }
    }
    Ok(Polytope::new(constraints))
}

/// Feasible transmission rates for one `(bob basis, outcome)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionRates {
    pub bob_basis: Basis,
    pub outcome: usize,
    pub region: Polytope,
    pub vertices: Vec<[f64; DIM]>,
    /// Interval hulls of `q_I, q_X, q_Y, q_Z`.
    pub q_bounds: [Interval; DIM],
}

impl TransmissionRates {
    pub fn extrema(&self, objective: &[f64; DIM]) -> Interval {
        extrema_over(&self.vertices, objective)
    }
}

pub fn transmission_rates(
    coeffs: &CoefficientSet,
    yields: &YieldBounds,
    bob_basis: Basis,
    outcome: usize,
) -> Result<TransmissionRates> {
    let region = build_inequality_system(coeffs, yields, bob_basis, outcome)?;
    let vertices = region.vertices().map_err(|_| {
        Error::Infeasible(format!("Bob basis {bob_basis:?} outcome {outcome}"))
    })?;
    let q_bounds = std::array::from_fn(|t| {
        let mut e = [0.0; DIM];
        e[t] = 1.0;
        extrema_over(&vertices, &e)
    });
    Ok(TransmissionRates { bob_basis, outcome, region, vertices, q_bounds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundDirection {
    Lower,
    Upper,
}

/// Bound on the joint probability that Alice's virtual measurement gives
/// `virt.bit` and Bob, choosing `rates.bob_basis`, records `rates.outcome`.
///
/// The virtual weights are unnormalized Gram norms, so Alice's outcome
/// probability is already contained in them; the prefactor is Bob's basis
/// probability (1/4) times the 1/4 from `|psi_vir> = (...)/2`.
pub fn bound_virtual_yield(virt: &VirtualCoefficients, rates: &TransmissionRates, direction: BoundDirection) -> f64 {
    let full = virt.yield_bounds(rates.extrema(&virt.objective()));
    match direction {
        BoundDirection::Lower => (0.0625 * full.lo).max(0.0),
        BoundDirection::Upper => 0.0625 * full.hi,
    }
}

pub fn virtual_yield_interval(virt: &VirtualCoefficients, rates: &TransmissionRates) -> Interval {
    Interval::new(
        bound_virtual_yield(virt, rates, BoundDirection::Lower),
        bound_virtual_yield(virt, rates, BoundDirection::Upper),
    )
}

/// Bounds on one phase-error rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseErrorBound {
    pub lower: f64,
    pub upper: f64,
}

impl PhaseErrorBound {
    pub fn exact(e: f64) -> Self {
        PhaseErrorBound { lower: e, upper: e }
    }
}

/// Phase-error bounds from virtual-yield intervals indexed `[bob outcome][alice bit]`.
///
/// The error numerator and the correct-outcome terms are optimized
/// independently over the shared region, which is conservative.
pub fn phase_error_bounds(y: &[[Interval; 2]; 2]) -> Result<PhaseErrorBound> {
    for row in y {
        for iv in row {
            if !(iv.lo <= iv.hi + YIELD_TOL) || !iv.lo.is_finite() || !iv.hi.is_finite() {
                return Err(Error::Input(format!("invalid virtual yield interval {iv:?}")));
            }
        }
    }
    let err_hi = y[1][0].hi + y[0][1].hi;
    let denom_hi = err_hi + y[0][0].lo + y[1][1].lo;
    if !(denom_hi > 0.0) {
        return Err(Error::Undefined(format!("phase-error denominator {denom_hi:e} <= 0")));
    }
    let err_lo = y[1][0].lo + y[0][1].lo;
    let denom_lo = err_lo + y[0][0].hi + y[1][1].hi;
    let lower = if denom_lo > 0.0 { err_lo / denom_lo } else { 0.0 };
    Ok(PhaseErrorBound {
        lower: lower.clamp(0.0, 1.0),
        upper: (err_hi / denom_hi).clamp(0.0, 1.0),
    })
}

/// Lower bound on the coherence parameter: each `(1 - 2E)^2` term takes its
/// minimum over the phase-error interval.
pub fn c_lower(phase_errors: &[PhaseErrorBound]) -> f64 {
    phase_errors
        .iter()
        .map(|e| {
            if e.lower <= 0.5 && e.upper >= 0.5 {
                0.0
            } else {
                (1.0 - 2.0 * e.lower).powi(2).min((1.0 - 2.0 * e.upper).powi(2))
            }
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveInformation {
    pub v_max: f64,
    pub f_v_max: f64,
    pub i_eve_upper: f64,
}

/// Upper bound on Eve's information per sifted Z-basis bit.
pub fn eve_information(c_lower: f64, e_zz_upper: f64) -> Result<EveInformation> {
    if !(0.0..=4.0 + 1e-9).contains(&c_lower) {
        return Err(Error::Domain(format!("C lower bound {c_lower} outside [0, 4]")));
    }
    if !(0.0..=1.0).contains(&e_zz_upper) {
        return Err(Error::Domain(format!("Z error bound {e_zz_upper} outside [0, 1]")));
    }
    if e_zz_upper >= E_ZZ_ABORT_THRESHOLD {
        return Err(Error::Abort(e_zz_upper));
    }
    let half_c = 0.5 * c_lower.min(4.0);
    let keep = 1.0 - e_zz_upper;
    let v_max = (half_c.sqrt() / keep).min(1.0);
    let f_v_max = if e_zz_upper > 0.0 {
        ((half_c - keep * keep * v_max * v_max).max(0.0).sqrt() / e_zz_upper).min(1.0)
    } else {
        0.0
    };
    let mut i_eve = keep * binary_entropy(0.5 * (1.0 + v_max))?;
    if e_zz_upper > 0.0 {
        i_eve += e_zz_upper * binary_entropy(0.5 * (1.0 + f_v_max))?;
    }
    Ok(EveInformation { v_max, f_v_max, i_eve_upper: i_eve.clamp(0.0, 1.0) })
}

/// Output of the bound engine for one set of single-photon statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SecuritySummary {
    /// Indexed `[alice basis (X, Y)][bob basis (X, Y)]`.
    pub phase_errors: [[PhaseErrorBound; 2]; 2],
    /// Indexed `[alice basis][bob basis][bob outcome][alice bit]`.
    pub virtual_yields: [[[[Interval; 2]; 2]; 2]; 2],
    pub c_lower: f64,
    pub e_zz_upper: f64,
    /// `None` when the Z-basis error bound is at or above the abort threshold.
    pub eve: Option<EveInformation>,
}

impl SecuritySummary {
    pub fn aborted(&self) -> bool {
        self.eve.is_none()
    }

    pub fn v_max(&self) -> Option<f64> {
        self.eve.map(|e| e.v_max)
    }

    /// Eve's information; a full bit when aborted.
    pub fn i_eve_upper(&self) -> f64 {
        self.eve.map_or(1.0, |e| e.i_eve_upper)
    }

    pub fn phase_error(&self, alice: Basis, bob: Basis) -> PhaseErrorBound {
        self.phase_errors[phase_index(alice)][phase_index(bob)]
    }
}

fn phase_index(b: Basis) -> usize {
    match b {
        Basis::Y => 1,
        _ => 0,
    }
}

/// Transmission-rate regions for Bob's X and Y outcomes, indexed `[basis][outcome]`.
pub fn phase_basis_rates(coeffs: &CoefficientSet, yields: &YieldBounds) -> Result<[[TransmissionRates; 2]; 2]> {
    let region = |b, s| transmission_rates(coeffs, yields, b, s);
    Ok([
        [region(Basis::X, 0)?, region(Basis::X, 1)?],
        [region(Basis::Y, 0)?, region(Basis::Y, 1)?],
    ])
}

/// Runs the whole bound chain.
pub fn analyze(coeffs: &CoefficientSet, yields: &YieldBounds, e_zz_upper: f64) -> Result<SecuritySummary> {
    let rates = phase_basis_rates(coeffs, yields)?;
    let mut virtual_yields = [[[[Interval::point(0.0); 2]; 2]; 2]; 2];
    let mut phase_errors = [[PhaseErrorBound::exact(0.0); 2]; 2];
    for (a, alice) in Basis::PHASE.into_iter().enumerate() {
        for b in 0..2 {
            let mut block = [[Interval::point(0.0); 2]; 2];
            for (s, row) in block.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    *cell = virtual_yield_interval(coeffs.virtual_branch(alice, j), &rates[b][s]);
                }
            }
            virtual_yields[a][b] = block;
            phase_errors[a][b] = phase_error_bounds(&block)?;
        }
    }
    let flat: Vec<_> = phase_errors.iter().flatten().copied().collect();
    let c = c_lower(&flat);
    let eve = match eve_information(c, e_zz_upper.clamp(0.0, 1.0)) {
        Ok(e) => Some(e),
        Err(Error::Abort(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(SecuritySummary { phase_errors, virtual_yields, c_lower: c, e_zz_upper, eve })
}
