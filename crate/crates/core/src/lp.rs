//! Dense two-phase tableau simplex for small linear programs
//! `min cᵀx  s.t.  A x ≤ b,  E x = f,  x ≥ 0`.
//!
//! Bland's rule is used for both entering and leaving variables, so the
//! returned vertex depends only on the input.

const PIVOT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a_ub: Vec<Vec<f64>>,
    pub b_ub: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    /// Multipliers of the `≤` rows (all `≤ 0` at an optimum).
    pub duals_ub: Vec<f64>,
    /// Multipliers of the equality rows.
    pub duals_eq: Vec<f64>,
}

impl LpSolution {
    fn failed(status: LpStatus, n: usize, m_ub: usize, m_eq: usize) -> Self {
        LpSolution {
            status,
            x: vec![0.0; n],
            objective: f64::NAN,
            duals_ub: vec![0.0; m_ub],
            duals_eq: vec![0.0; m_eq],
        }
    }
}

impl LpProblem {
    pub fn new(c: Vec<f64>) -> Self {
        LpProblem { c, ..Default::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_ub.push(row);
        self.b_ub.push(rhs);
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        self.a_eq.push(row);
        self.b_eq.push(rhs);
    }

    fn check_shape(&self) {
        let n = self.c.len();
        assert_eq!(self.a_ub.len(), self.b_ub.len(), "A and b row counts differ");
        assert_eq!(self.a_eq.len(), self.b_eq.len(), "E and f row counts differ");
        for row in self.a_ub.iter().chain(&self.a_eq) {
            assert_eq!(row.len(), n, "constraint row length differs from c");
        }
    }

    /// Largest violation of `x` against the constraints (`x ≥ 0` included).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let ub = self.a_ub.iter().zip(&self.b_ub).map(|(r, b)| dot(r) - b);
        let eq = self.a_eq.iter().zip(&self.b_eq).map(|(r, f)| (dot(r) - f).abs());
        let neg = x.iter().map(|v| -v);
        ub.chain(eq).chain(neg).fold(0.0, f64::max)
    }
}

struct Tableau {
    rows: usize,
    /// structural + slack + artificial columns, then the rhs column
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, col: usize, obj: &mut [f64]) {
        let w = self.width;
        let p = self.data[r * w + col];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.data[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.data[i * w + col];
            if f != 0.0 {
                for (v, pr) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        let f = obj[col];
        if f != 0.0 {
            for (v, pr) in obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
        }
        self.basis[r] = col;
    }

    /// Runs Bland-rule simplex on the objective row `obj` (reduced costs,
    /// last entry minus the objective value). Columns `≥ allowed` never
    /// enter. Returns false when unbounded.
    fn optimize(&mut self, obj: &mut [f64], allowed: usize) -> bool {
        loop {
            let Some(col) = (0..allowed).find(|&j| obj[j] < -PIVOT_TOL) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && self.basis[i] < bb),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r, _)) => self.pivot(r, col, obj),
            }
        }
    }
}

/// Solves the LP with the two-phase method.
///
/// # Panics
/// On inconsistent dimensions.
pub fn solve(p: &LpProblem) -> LpSolution {
    p.check_shape();
    let n = p.c.len();
    let (m_ub, m_eq) = (p.b_ub.len(), p.b_eq.len());
    let m = m_ub + m_eq;

    // row scaling: largest coefficient magnitude becomes one
    let scale: Vec<f64> = p
        .a_ub
        .iter()
        .chain(&p.a_eq)
        .map(|row| {
            let s = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    let rhs: Vec<f64> = p.b_ub.iter().chain(&p.b_eq).zip(&scale).map(|(b, s)| b / s).collect();
    let flipped: Vec<bool> = rhs.iter().map(|&b| b < 0.0).collect();
    let needs_art: Vec<bool> = (0..m).map(|i| i >= m_ub || flipped[i]).collect();
    let art_count = needs_art.iter().filter(|&&a| a).count();

    let slack0 = n;
    let art0 = n + m_ub;
    let total = art0 + art_count;
    let width = total + 1;
    let mut data = vec![0.0; m * width];
    let mut basis = vec![0; m];
    let mut art_col = vec![usize::MAX; m];
    let mut next_art = art0;
    for i in 0..m {
        let sign = if flipped[i] { -1.0 } else { 1.0 };
        let row = if i < m_ub { &p.a_ub[i] } else { &p.a_eq[i - m_ub] };
        for j in 0..n {
            data[i * width + j] = sign * row[j] / scale[i];
        }
        if i < m_ub {
            data[i * width + slack0 + i] = sign;
        }
        data[i * width + total] = sign * rhs[i];
        if needs_art[i] {
            data[i * width + next_art] = 1.0;
            art_col[i] = next_art;
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = slack0 + i;
        }
    }
    let mut t = Tableau { rows: m, width, data, basis };

    // phase 1: minimize the sum of artificials
    if art_count > 0 {
        let mut obj = vec![0.0; width];
        for j in art0..total {
            obj[j] = 1.0;
        }
        for i in 0..m {
            if needs_art[i] {
                for j in 0..width {
                    obj[j] -= t.at(i, j);
                }
            }
        }
        t.optimize(&mut obj, art0);
        if -obj[total] > FEAS_TOL {
            return LpSolution::failed(LpStatus::Infeasible, n, m_ub, m_eq);
        }
        // drive zero-level artificials out of the basis where possible
        for i in 0..m {
            if t.basis[i] >= art0 {
                if let Some(col) = (0..art0).find(|&j| t.at(i, j).abs() > PIVOT_TOL) {
                    t.pivot(i, col, &mut obj);
                }
            }
        }
    }

    // phase 2
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(&p.c);
    for i in 0..m {
        let cb = obj[t.basis[i]];
        if cb != 0.0 {
            for j in 0..width {
                obj[j] -= cb * t.at(i, j);
            }
        }
    }
    if !t.optimize(&mut obj, art0) {
        return LpSolution::failed(LpStatus::Unbounded, n, m_ub, m_eq);
    }

    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i);
        }
    }
    let objective = p.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    // reduced cost of a unit column e_i is -y_i for the scaled row i
    let mut duals_ub = vec![0.0; m_ub];
    let mut duals_eq = vec![0.0; m_eq];
    for i in 0..m {
        let y_scaled = if i < m_ub {
            -obj[slack0 + i]
        } else {
            let sign = if flipped[i] { -1.0 } else { 1.0 };
            -sign * obj[art_col[i]]
        };
        let y = y_scaled / scale[i];
        if i < m_ub {
            duals_ub[i] = y;
        } else {
            duals_eq[i - m_ub] = y;
        }
    }
    LpSolution { status: LpStatus::Optimal, x, objective, duals_ub, duals_eq }
}

/// Row generation for problems with many `≤` rows of which few bind.
///
/// Solves over a growing subset of the inequality rows, adding every row the
/// current solution violates, until none is violated. The result is optimal
/// for the full problem. Equality rows are always kept.
pub fn solve_row_generation(p: &LpProblem, initial: &[usize]) -> LpSolution {
    p.check_shape();
    let m_ub = p.b_ub.len();
    let mut active: Vec<bool> = vec![false; m_ub];
    for &i in initial {
        active[i] = true;
    }
    loop {
        let rows: Vec<usize> = (0..m_ub).filter(|&i| active[i]).collect();
        let sub = LpProblem {
            c: p.c.clone(),
            a_ub: rows.iter().map(|&i| p.a_ub[i].clone()).collect(),
            b_ub: rows.iter().map(|&i| p.b_ub[i]).collect(),
            a_eq: p.a_eq.clone(),
            b_eq: p.b_eq.clone(),
        };
        let sol = solve(&sub);
        match sol.status {
            LpStatus::Infeasible => return LpSolution::failed(LpStatus::Infeasible, p.c.len(), m_ub, p.b_eq.len()),
            LpStatus::Unbounded => {
                if rows.len() == m_ub {
                    return LpSolution::failed(LpStatus::Unbounded, p.c.len(), m_ub, p.b_eq.len());
                }
                active.iter_mut().for_each(|a| *a = true);
                continue;
            }
            LpStatus::Optimal => {}
        }
        let mut added = false;
        for i in 0..m_ub {
            if active[i] {
                continue;
            }
            let lhs: f64 = p.a_ub[i].iter().zip(&sol.x).map(|(a, x)| a * x).sum();
            let s = p.a_ub[i].iter().fold(p.b_ub[i].abs(), |a, v| a.max(v.abs())).max(1e-300);
            if (lhs - p.b_ub[i]) / s > FEAS_TOL * 1e-2 {
                active[i] = true;
                added = true;
            }
        }
        if !added {
            let mut duals_ub = vec![0.0; m_ub];
            for (k, &i) in rows.iter().enumerate() {
                duals_ub[i] = sol.duals_ub[k];
            }
            return LpSolution { duals_ub, ..sol };
        }
    }
}
