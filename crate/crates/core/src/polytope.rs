//! Exact linear extrema over small bounded polytopes in four variables.
//!
//! Every vertex of `{x : a_k . x <= b_k}` is the solution of four linearly
//! independent active constraints, so enumerating all 4-subsets and keeping the
//! feasible solutions yields the vertex set. With at most a few dozen
//! constraints this is a few thousand 4x4 solves.

use crate::error::{Error, Result};

pub const DIM: usize = 4;

/// Feasibility slack on constraints normalized to unit row norm.
const FEASIBILITY_TOL: f64 = 1e-11;
const PIVOT_TOL: f64 = 1e-12;

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// `coeffs . x <= bound`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub coeffs: [f64; DIM],
    pub bound: f64,
}

impl HalfSpace {
    pub fn new(coeffs: [f64; DIM], bound: f64) -> Self {
        HalfSpace { coeffs, bound }
    }

    /// `lo <= coeffs . x <= hi` as two half-spaces.
    pub fn two_sided(coeffs: [f64; DIM], lo: f64, hi: f64) -> [HalfSpace; 2] {
        [HalfSpace::new(coeffs, hi), HalfSpace::new(coeffs.map(|c| -c), -lo)]
    }

    fn normalized(&self) -> Option<HalfSpace> {
        let norm = self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        (norm > 0.0).then(|| HalfSpace::new(self.coeffs.map(|c| c / norm), self.bound / norm))
    }

    pub fn violation(&self, x: &[f64; DIM]) -> f64 {
        dot(&self.coeffs, x) - self.bound
    }
}

pub fn dot(a: &[f64; DIM], b: &[f64; DIM]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve4(mut a: [[f64; DIM]; DIM], mut b: [f64; DIM]) -> Option<[f64; DIM]> {
    for col in 0..DIM {
        let pivot = (col..DIM).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < PIVOT_TOL {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..DIM {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..DIM {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = [0.0; DIM];
    for row in (0..DIM).rev() {
        let tail: f64 = (row + 1..DIM).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

pub fn det4(a: &[[f64; DIM]; DIM]) -> f64 {
    let mut m = *a;
    let mut det = 1.0;
    for col in 0..DIM {
        let pivot = (col..DIM)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap_or(col);
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..DIM {
            let f = m[row][col] / m[col][col];
            for k in col..DIM {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    det
}

/// A bounded polytope in four variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    constraints: Vec<HalfSpace>,
}

impl Polytope {
    pub fn new(constraints: Vec<HalfSpace>) -> Self {
        Polytope { constraints }
    }

    pub fn constraints(&self) -> &[HalfSpace] {
        &self.constraints
    }

    pub fn contains(&self, x: &[f64; DIM], tol: f64) -> bool {
        self.constraints.iter().all(|h| match h.normalized() {
            Some(n) => n.violation(x) <= tol,
            None => h.bound >= -tol,
        })
    }

    /// All vertices, deduplicated up to `1e-12`. Errors when the polytope is empty.
    ///
    /// The caller is responsible for boundedness; an unbounded feasible set
    /// yields only its finite vertices.
    pub fn vertices(&self) -> Result<Vec<[f64; DIM]>> {
        let mut rows = Vec::with_capacity(self.constraints.len());
        for h in &self.constraints {
            match h.normalized() {
                Some(n) => rows.push(n),
                None if h.bound >= -FEASIBILITY_TOL => {}
                None => return Err(Error::Infeasible("constraint 0 <= negative bound".into())),
            }
        }
        let m = rows.len();
        let mut vertices: Vec<[f64; DIM]> = Vec::new();
        let mut idx = [0usize, 1, 2, 3];
        if m < DIM {
            return Err(Error::Infeasible("fewer than four non-trivial constraints".into()));
        }
        loop {
            let a = idx.map(|i| rows[i].coeffs);
            let b = idx.map(|i| rows[i].bound);
            if let Some(x) = solve4(a, b) {
                if rows.iter().all(|r| r.violation(&x) <= FEASIBILITY_TOL)
                    && !vertices.iter().any(|v| v.iter().zip(&x).all(|(p, q)| (p - q).abs() < 1e-12))
                {
                    vertices.push(x);
                }
            }
            if !next_combination(&mut idx, m) {
                break;
            }
        }
        if vertices.is_empty() {
            Err(Error::Infeasible("empty polytope".into()))
        } else {
            Ok(vertices)
        }
    }
}

fn next_combination(idx: &mut [usize; DIM], n: usize) -> bool {
    let mut i = DIM;
    while i > 0 {
        i -= 1;
        if idx[i] < n - DIM + i {
            idx[i] += 1;
            for j in i + 1..DIM {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Extrema of a linear objective over a precomputed vertex set.
pub fn extrema_over(vertices: &[[f64; DIM]], objective: &[f64; DIM]) -> Interval {
    vertices.iter().fold(Interval::new(f64::INFINITY, f64::NEG_INFINITY), |acc, v| {
        let val = dot(objective, v);
        Interval::new(acc.lo.min(val), acc.hi.max(val))
    })
}

/// `(min, max)` of `objective . x` over the polytope.
pub fn bound_q_extrema(polytope: &Polytope, objective: &[f64; DIM]) -> Result<Interval> {
    Ok(extrema_over(&polytope.vertices()?, objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_box() -> Vec<HalfSpace> {
        let mut c = Vec::new();
        for i in 0..DIM {
            let mut e = [0.0; DIM];
            e[i] = 1.0;
            c.extend(HalfSpace::two_sided(e, 0.0, 1.0));
        }
        c
    }

    #[test]
    fn box_extrema() {
        let p = Polytope::new(unit_box());
        assert_eq!(p.vertices().unwrap().len(), 16);
        let r = bound_q_extrema(&p, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!((r.lo, r.hi), (0.0, 1.0));
        let r = bound_q_extrema(&p, &[1.0, -2.0, 0.5, 0.0]).unwrap();
        assert_eq!((r.lo, r.hi), (-2.0, 1.5));
    }

    #[test]
    fn pinned_point() {
        let mut c = unit_box();
        let rows = [[1.0, 1.0, 0.0, 0.0], [1.0, -1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 2.0], [0.0, 0.0, 1.0, -1.0]];
        let x = [0.3, 0.2, 0.4, 0.1];
        for r in rows {
            let v = dot(&r, &x);
            c.extend(HalfSpace::two_sided(r, v, v));
        }
        let r = bound_q_extrema(&Polytope::new(c), &[0.7, -0.1, 3.0, 1.0]).unwrap();
        let want = dot(&[0.7, -0.1, 3.0, 1.0], &x);
        assert!((r.lo - want).abs() < 1e-12 && (r.hi - want).abs() < 1e-12);
    }

    #[test]
    fn infeasible_region() {
        let mut c = unit_box();
        c.extend(HalfSpace::two_sided([1.0, 0.0, 0.0, 0.0], 2.0, 3.0));
        assert!(matches!(Polytope::new(c).vertices(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn solve_and_det() {
        let a = [[2.0, 1.0, 0.0, 0.0], [1.0, 3.0, 1.0, 0.0], [0.0, 1.0, 4.0, 1.0], [0.0, 0.0, 1.0, 5.0]];
        let x = solve4(a, [1.0, 2.0, 3.0, 4.0]).unwrap();
        for (row, b) in a.iter().zip([1.0, 2.0, 3.0, 4.0]) {
            assert!((dot(row, &x) - b).abs() < 1e-12);
        }
        // Tridiagonal determinant recurrence: 2, 5, 18, 85.
        assert!((det4(&a) - 85.0).abs() < 1e-10);
        let singular = [[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]];
        assert!(solve4(singular, [1.0; 4]).is_none());
        assert_eq!(det4(&singular), 0.0);
    }

    /// Brute force: maximize over a 32^4 grid (~10^6 points) of the unit box.
    #[test]
    fn random_polytopes_agree_with_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        const STEPS: usize = 32;
        for _ in 0..4 {
            let mut c = unit_box();
            for _ in 0..3 {
                let a: [f64; DIM] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
                // Keep the box centre feasible.
                let centre = dot(&a, &[0.5; DIM]);
                c.push(HalfSpace::new(a, centre + rng.gen_range(0.05..0.5)));
            }
            let poly = Polytope::new(c);
            let obj: [f64; DIM] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let exact = bound_q_extrema(&poly, &obj).unwrap();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            let h = 1.0 / (STEPS - 1) as f64;
            for i in 0..STEPS.pow(4) {
                let x = [i % STEPS, (i / STEPS) % STEPS, (i / STEPS / STEPS) % STEPS, i / STEPS.pow(3)]
                    .map(|k| k as f64 * h);
                if poly.constraints().iter().all(|hs| hs.violation(&x) <= 0.0) {
                    let v = dot(&obj, &x);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            // The grid never beats the exact optimum and gets within one cell of it.
            let cell = h * obj.iter().map(|c| c.abs()).sum::<f64>();
            assert!(lo >= exact.lo - 1e-12 && hi <= exact.hi + 1e-12);
            assert!(lo - exact.lo <= 2.0 * cell && exact.hi - hi <= 2.0 * cell, "{lo} {hi} {exact:?}");
        }
    }
}
