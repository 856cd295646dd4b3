//! Dense two-phase tableau simplex: largest-coefficient pricing, a Harris
//! ratio test, right-hand-side perturbation against degeneracy, and a
//! fallback to Bland's rule on stalls that survive it.
//!
//! The engine works on the standard form `min c·z, A z = b, z ≥ 0, b ≥ 0`
//! produced by [`StandardForm::build`]. Every row owns an identity column
//! (its slack, or an artificial), which is how row duals are read off the
//! final reduced-cost row.

use super::scalar::LpScalar;
use super::{LinearProgram, LpError, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RowOrigin {
    Eq(usize),
    Le(usize),
    /// Internal `z ≤ upper − lower` row for a doubly bounded variable.
    Upper(usize),
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum VarMap {
    /// `x = lower + z[col]`
    Shifted { col: usize },
    /// `x = upper − z[col]`
    Reflected { col: usize },
    /// `x = z[pos] − z[neg]`
    Split { pos: usize, neg: usize },
}

pub(crate) struct StandardForm<T> {
    pub rows: Vec<Vec<T>>,
    pub rhs: Vec<T>,
    pub cost: Vec<T>,
    pub ncols: usize,
    /// Slack column usable as the initial basic variable, if any.
    pub slack_identity: Vec<Option<usize>>,
    pub row_origin: Vec<RowOrigin>,
    /// +1 or −1: the sign applied to the original row to make `rhs ≥ 0`.
    pub row_sign: Vec<i8>,
    pub var_map: Vec<VarMap>,
}

impl<T: LpScalar> StandardForm<T> {
    /// Converts to `min` standard form. For `Maximize` the cost is negated.
    pub fn build(prob: &LinearProgram) -> Self {
        let n = prob.objective.len();
        let flip = matches!(prob.sense, Sense::Maximize);
        let mut var_map = Vec::with_capacity(n);
        let mut ncols = 0;
        let mut upper_rows = Vec::new();
        for (j, b) in prob.bounds.iter().enumerate() {
            match (b.lower, b.upper) {
                (Some(_), upper) => {
                    var_map.push(VarMap::Shifted { col: ncols });
                    if upper.is_some() {
                        upper_rows.push(j);
                    }
                    ncols += 1;
                }
                (None, Some(_)) => {
                    var_map.push(VarMap::Reflected { col: ncols });
                    ncols += 1;
                }
                (None, None) => {
                    var_map.push(VarMap::Split {
                        pos: ncols,
                        neg: ncols + 1,
                    });
                    ncols += 2;
                }
            }
        }
        let n_struct = ncols;
        let n_le = prob.le.len() + upper_rows.len();
        ncols += n_le;

        let mut cost = vec![T::zero(); ncols];
        for j in 0..n {
            let c = if flip {
                T::from_f64(-prob.objective[j])
            } else {
                T::from_f64(prob.objective[j])
            };
            match var_map[j] {
                VarMap::Shifted { col } => {
                    cost[col] = c;
                }
                VarMap::Reflected { col } => {
                    cost[col] = -c;
                }
                VarMap::Split { pos, neg } => {
                    cost[pos] = c.clone();
                    cost[neg] = -c;
                }
            }
        }

        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        let mut row_origin = Vec::new();
        let mut slack_identity = Vec::new();

        let lower_row = |coeffs: &[f64], b: f64| -> (Vec<T>, T) {
            let mut row = vec![T::zero(); ncols];
            let mut r = T::from_f64(b);
            for (j, &a) in coeffs.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let a = T::from_f64(a);
                let bd = prob.bounds[j];
                match var_map[j] {
                    VarMap::Shifted { col } => {
                        r = r - a.clone() * T::from_f64(bd.lower.unwrap());
                        row[col] = a;
                    }
                    VarMap::Reflected { col } => {
                        r = r - a.clone() * T::from_f64(bd.upper.unwrap());
                        row[col] = -a;
                    }
                    VarMap::Split { pos, neg } => {
                        row[pos] = a.clone();
                        row[neg] = -a;
                    }
                }
            }
            (row, r)
        };

        for (i, (coeffs, b)) in prob.eq.iter().enumerate() {
            let (row, r) = lower_row(coeffs, *b);
            rows.push(row);
            rhs.push(r);
            row_origin.push(RowOrigin::Eq(i));
            slack_identity.push(None);
        }
        let mut slack = n_struct;
        for (i, (coeffs, b)) in prob.le.iter().enumerate() {
            let (mut row, r) = lower_row(coeffs, *b);
            row[slack] = T::one();
            rows.push(row);
            rhs.push(r);
            row_origin.push(RowOrigin::Le(i));
            slack_identity.push(Some(slack));
            slack += 1;
        }
        for &j in &upper_rows {
            let mut row = vec![T::zero(); ncols];
            if let VarMap::Shifted { col } = var_map[j] {
                row[col] = T::one();
            }
            row[slack] = T::one();
            let b = prob.bounds[j];
            rows.push(row);
            rhs.push(T::from_f64(b.upper.unwrap()) - T::from_f64(b.lower.unwrap()));
            row_origin.push(RowOrigin::Upper(j));
            slack_identity.push(Some(slack));
            slack += 1;
        }

        let mut row_sign = vec![1i8; rows.len()];
        for i in 0..rows.len() {
            if rhs[i] < T::zero() {
                for v in rows[i].iter_mut() {
                    if !v.is_exact_zero() {
                        *v = -v.clone();
                    }
                }
                rhs[i] = -rhs[i].clone();
                row_sign[i] = -1;
                slack_identity[i] = None;
            }
        }

        StandardForm {
            rows,
            rhs,
            cost,
            ncols,
            slack_identity,
            row_origin,
            row_sign,
            var_map,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RawStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

pub(crate) struct RawSolution<T> {
    pub status: RawStatus,
    /// Standard-form point (structural and slack columns).
    pub z: Vec<T>,
    /// Row duals for the (sign-normalized) standard-form rows.
    pub y: Vec<T>,
    /// Optimal value of `c·z` in min-space, offset excluded.
    pub objective: T,
    /// Sum of artificials at the end of phase 1 (zero when no phase 1 ran).
    pub phase1: T,
    pub iterations: usize,
}

/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 20;

/// Relative size of the right-hand-side perturbation in floating point.
const PERTURBATION: f64 = 1e-7;

struct Tableau<T> {
    m: usize,
    w: usize,
    ncols: usize,
    data: Vec<T>,
    obj: Vec<T>,
    basis: Vec<usize>,
    identity: Vec<usize>,
    eps: T,
    iterations: usize,
    max_iter: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
}

impl<T: LpScalar> Tableau<T> {
    fn new(sf: &StandardForm<T>, eps: T) -> Self {
        let m = sf.rows.len();
        let nart = sf.slack_identity.iter().filter(|s| s.is_none()).count();
        // last two columns: perturbation record, then right-hand side
        let w = sf.ncols + nart + 2;
        let mut data = vec![T::zero(); m * w];
        let mut basis = Vec::with_capacity(m);
        let mut next_art = sf.ncols;
        for i in 0..m {
            for j in 0..sf.ncols {
                data[i * w + j] = sf.rows[i][j].clone();
            }
            data[i * w + w - 1] = sf.rhs[i].clone();
            match sf.slack_identity[i] {
                Some(col) => basis.push(col),
                None => {
                    data[i * w + next_art] = T::one();
                    basis.push(next_art);
                    next_art += 1;
                }
            }
        }
        let identity = basis.clone();
        Tableau {
            m,
            w,
            ncols: sf.ncols,
            data,
            obj: vec![T::zero(); w],
            basis,
            identity,
            eps,
            iterations: 0,
            max_iter: 50 * (m + w),
        }
    }

    #[inline]
    fn rhs(&self, i: usize) -> &T {
        &self.data[i * self.w + self.w - 1]
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.ncols && j < self.w - 2
    }

    /// Shifts every right-hand side up by a small distinct amount, recorded
    /// in the perturbation column so [`Self::unperturb`] can remove it.
    fn perturb(&mut self) {
        if self.eps.is_exact_zero() {
            return;
        }
        let w = self.w;
        for i in 0..self.m {
            let u = 0.5 + 0.5 * ((i as u64).wrapping_mul(2_654_435_761) % 1000) as f64 / 1000.0;
            let b = self.rhs(i).to_f64().abs();
            let d = T::from_f64(PERTURBATION * (1.0 + b) * u);
            self.data[i * w + w - 2] = self.data[i * w + w - 2].clone() + d.clone();
            self.data[i * w + w - 1] = self.data[i * w + w - 1].clone() + d;
        }
    }

    fn unperturb(&mut self) {
        let w = self.w;
        for i in 0..self.m {
            let d = std::mem::replace(&mut self.data[i * w + w - 2], T::zero());
            self.data[i * w + w - 1] = self.data[i * w + w - 1].clone() - d;
        }
        let d = std::mem::replace(&mut self.obj[w - 2], T::zero());
        self.obj[w - 1] = self.obj[w - 1].clone() - d;
    }

    /// Dual simplex pivots until every basic value is above `−eps`. Returns
    /// false when some row admits no pivot.
    fn restore_feasibility(&mut self, allow_artificial: bool) -> Result<bool, LpError> {
        let neg_eps = -self.eps.clone();
        loop {
            let mut row: Option<usize> = None;
            for i in 0..self.m {
                if *self.rhs(i) < neg_eps && row.is_none_or(|r| self.rhs(i) < self.rhs(r)) {
                    row = Some(i);
                }
            }
            let Some(r) = row else {
                return Ok(true);
            };
            let mut enter: Option<(usize, T, T)> = None;
            for j in 0..self.w - 2 {
                if !allow_artificial && self.is_artificial(j) {
                    continue;
                }
                let a = self.data[r * self.w + j].clone();
                if a >= neg_eps {
                    continue;
                }
                let a = -a;
                let mut d = self.obj[j].clone();
                if d < T::zero() {
                    d = T::zero();
                }
                let ratio = d / a.clone();
                let take = match &enter {
                    None => true,
                    Some((_, best, pa)) => {
                        let diff = ratio.clone() - best.clone();
                        diff < neg_eps || (diff.abs() <= self.eps && a > *pa)
                    }
                };
                if take {
                    enter = Some((j, ratio, a));
                }
            }
            let Some((c, _, _)) = enter else {
                return Ok(false);
            };
            self.iterations += 1;
            if self.iterations > self.max_iter {
                return Err(LpError::NumericalFailure(format!(
                    "iteration cap {} exceeded",
                    self.max_iter
                )));
            }
            self.pivot(r, c);
        }
    }

    /// Primal simplex on perturbed right-hand sides, then removal of the
    /// perturbation and a clean-up pass on the true data.
    fn optimize(&mut self, cost: &[T], allow_artificial: bool) -> Result<StepOutcome, LpError> {
        self.perturb();
        self.set_objective(cost);
        let outcome = self.run(allow_artificial)?;
        self.unperturb();
        if let StepOutcome::Unbounded = outcome {
            return Ok(outcome);
        }
        self.restore_feasibility(allow_artificial)?;
        self.run(allow_artificial)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.w;
        let p = self.data[r * w + c].clone();
        let mut prow: Vec<(usize, T)> = Vec::new();
        for j in 0..w {
            let v = &self.data[r * w + j];
            if !v.is_exact_zero() {
                let q = v.clone() / p.clone();
                self.data[r * w + j] = q.clone();
                prow.push((j, q));
            }
        }
        self.data[r * w + c] = T::one();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c].clone();
            if f.is_exact_zero() {
                continue;
            }
            let row = &mut self.data[i * w..(i + 1) * w];
            for (j, q) in &prow {
                row[*j] = row[*j].clone() - f.clone() * q.clone();
            }
            row[c] = T::zero();
        }
        let f = self.obj[c].clone();
        if !f.is_exact_zero() {
            for (j, q) in &prow {
                self.obj[*j] = self.obj[*j].clone() - f.clone() * q.clone();
            }
            self.obj[c] = T::zero();
        }
        self.basis[r] = c;
    }

    /// Pivots until optimality or an unbounded ray. Entering columns follow
    /// the most negative reduced cost; after a run of degenerate pivots the
    /// rule falls back to Bland's until the objective moves again.
    fn run(&mut self, allow_artificial: bool) -> Result<StepOutcome, LpError> {
        let neg_eps = -self.eps.clone();
        let mut degenerate_run = 0usize;
        loop {
            let bland = degenerate_run >= DEGENERATE_LIMIT;
            let candidates = (0..self.w - 2)
                .filter(|&j| allow_artificial || !self.is_artificial(j))
                .filter(|&j| self.obj[j] < neg_eps);
            let entering = if bland {
                candidates.min()
            } else {
                let mut best: Option<usize> = None;
                for j in candidates {
                    if best.is_none_or(|b| self.obj[j] < self.obj[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else {
                return Ok(StepOutcome::Optimal);
            };
            let leave = if bland {
                self.ratio_test_bland(c)
            } else {
                self.ratio_test_harris(c)
            };
            let Some((r, step)) = leave else {
                return Ok(StepOutcome::Unbounded);
            };
            self.iterations += 1;
            if self.iterations > self.max_iter {
                return Err(LpError::NumericalFailure(format!(
                    "iteration cap {} exceeded",
                    self.max_iter
                )));
            }
            if step <= self.eps {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }

    /// `max(b_i, 0) / a_ic` for rows with a usable pivot.
    fn ratios(&self, c: usize) -> impl Iterator<Item = (usize, T, T)> + '_ {
        (0..self.m).filter_map(move |i| {
            let a = &self.data[i * self.w + c];
            if *a <= self.eps {
                return None;
            }
            let mut b = self.rhs(i).clone();
            if b < T::zero() {
                b = T::zero();
            }
            Some((i, b / a.clone(), a.clone()))
        })
    }

    /// Minimum ratio, ties to the smallest basic index.
    fn ratio_test_bland(&self, c: usize) -> Option<(usize, T)> {
        let mut leave: Option<(usize, T)> = None;
        for (i, ratio, _) in self.ratios(c) {
            let take = match &leave {
                None => true,
                Some((bi, best)) => {
                    let diff = ratio.clone() - best.clone();
                    diff < -self.eps.clone()
                        || (diff.abs() <= self.eps && self.basis[i] < self.basis[*bi])
                }
            };
            if take {
                leave = Some((i, ratio));
            }
        }
        leave
    }

    /// Two-pass Harris test: the largest pivot among rows whose ratio is
    /// within the bound relaxed by `eps`.
    fn ratio_test_harris(&self, c: usize) -> Option<(usize, T)> {
        let mut bound: Option<T> = None;
        for (i, _, a) in self.ratios(c) {
            let b = self.rhs(i).clone();
            let b = if b < T::zero() { T::zero() } else { b };
            let relaxed = (b + self.eps.clone()) / a;
            if bound.as_ref().is_none_or(|t| relaxed < *t) {
                bound = Some(relaxed);
            }
        }
        let bound = bound?;
        let mut leave: Option<(usize, T, T)> = None;
        for (i, ratio, a) in self.ratios(c) {
            if ratio <= bound && leave.as_ref().is_none_or(|(_, _, pa)| a > *pa) {
                leave = Some((i, ratio, a));
            }
        }
        leave.map(|(i, r, _)| (i, r))
    }

    fn set_objective(&mut self, cost: &[T]) {
        let w = self.w;
        for j in 0..w {
            self.obj[j] = if j < cost.len() {
                cost[j].clone()
            } else {
                T::zero()
            };
        }
        for i in 0..self.m {
            let cb = if self.basis[i] < cost.len() {
                cost[self.basis[i]].clone()
            } else {
                T::zero()
            };
            if cb.is_exact_zero() {
                continue;
            }
            for j in 0..w {
                let v = &self.data[i * w + j];
                if !v.is_exact_zero() {
                    self.obj[j] = self.obj[j].clone() - cb.clone() * v.clone();
                }
            }
        }
    }

    /// Pivots artificial variables out of the basis where a real column allows it.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for j in 0..self.ncols {
                let a = self.data[r * self.w + j].abs();
                if a > self.eps && best.as_ref().is_none_or(|(_, b)| a > *b) {
                    best = Some((j, a));
                }
            }
            if let Some((c, _)) = best {
                self.pivot(r, c);
            }
        }
    }

    /// Rebuilds the tableau from the original data for the current basis.
    fn reinvert(&mut self, sf: &StandardForm<T>) -> Result<(), LpError> {
        let target = self.basis.clone();
        let fresh = Tableau::new(sf, self.eps.clone());
        self.data = fresh.data;
        self.basis = fresh.basis;
        let mut done = vec![false; self.m];
        for &c in &target {
            let mut best: Option<(usize, T)> = None;
            for i in 0..self.m {
                if done[i] {
                    continue;
                }
                let a = self.data[i * self.w + c].abs();
                if best.as_ref().is_none_or(|(_, b)| a > *b) {
                    best = Some((i, a));
                }
            }
            match best {
                Some((i, a)) if a > self.eps => {
                    self.pivot(i, c);
                    done[i] = true;
                }
                _ => {
                    return Err(LpError::NumericalFailure(
                        "singular basis on reinversion".into(),
                    ))
                }
            }
        }
        for i in 0..self.m {
            let b = self.rhs(i).clone();
            if b < T::zero() {
                if b.abs() > self.eps.clone() * T::from_f64(1e3) {
                    return Err(LpError::NumericalFailure(
                        "basis lost primal feasibility".into(),
                    ));
                }
                let w = self.w;
                self.data[i * w + w - 1] = T::zero();
            }
        }
        Ok(())
    }

    fn extract(&self, status: RawStatus, phase1: T) -> RawSolution<T> {
        let mut z = vec![T::zero(); self.ncols];
        for i in 0..self.m {
            if self.basis[i] < self.ncols {
                z[self.basis[i]] = self.rhs(i).clone();
            }
        }
        let y = self.identity.iter().map(|&id| -self.obj[id].clone()).collect();
        RawSolution {
            status,
            z,
            y,
            objective: -self.obj[self.w - 1].clone(),
            phase1,
            iterations: self.iterations,
        }
    }
}

fn residuals<T: LpScalar>(sf: &StandardForm<T>, sol: &RawSolution<T>) -> (f64, f64) {
    let z: Vec<f64> = sol.z.iter().map(|v| v.to_f64()).collect();
    let y: Vec<f64> = sol.y.iter().map(|v| v.to_f64()).collect();
    let mut primal = z.iter().fold(0.0f64, |acc, &v| acc.max(-v));
    for (row, b) in sf.rows.iter().zip(&sf.rhs) {
        let lhs: f64 = row.iter().zip(&z).map(|(a, v)| a.to_f64() * v).sum();
        primal = primal.max((lhs - b.to_f64()).abs());
    }
    let mut dual = 0.0f64;
    for j in 0..sf.ncols {
        let mut d = sf.cost[j].to_f64();
        for (i, row) in sf.rows.iter().enumerate() {
            let a = row[j].to_f64();
            if a != 0.0 {
                d -= a * y[i];
            }
        }
        dual = dual.max(-d);
    }
    (primal, dual)
}

/// Solves a standard form. `eps` is the pivot/optimality tolerance.
pub(crate) fn solve_standard<T: LpScalar>(
    sf: &StandardForm<T>,
    eps: T,
    feas_tol: f64,
) -> Result<RawSolution<T>, LpError> {
    let mut tab = Tableau::new(sf, eps);
    let nart = tab.w - 2 - tab.ncols;
    let mut phase1 = T::zero();
    if nart > 0 {
        let mut c1 = vec![T::zero(); tab.w - 2];
        for c in c1.iter_mut().skip(tab.ncols) {
            *c = T::one();
        }
        tab.optimize(&c1, true)?;
        phase1 = -tab.obj[tab.w - 1].clone();
        if phase1.to_f64() > feas_tol {
            return Ok(tab.extract(RawStatus::Infeasible, phase1));
        }
        tab.drive_out_artificials();
    }
    if let StepOutcome::Unbounded = tab.optimize(&sf.cost, false)? {
        return Ok(tab.extract(RawStatus::Unbounded, phase1));
    }
    let mut reinversions = 0;
    loop {
        match tab.run(false)? {
            StepOutcome::Unbounded => return Ok(tab.extract(RawStatus::Unbounded, phase1)),
            StepOutcome::Optimal => {
                let sol = tab.extract(RawStatus::Optimal, phase1.clone());
                if tab.eps.is_exact_zero() {
                    return Ok(sol);
                }
                let (p, d) = residuals(sf, &sol);
                if (p <= feas_tol && d <= feas_tol) || reinversions >= 2 {
                    if p > feas_tol * 1e3 {
                        return Err(LpError::NumericalFailure(format!(
                            "primal residual {p:.3e} after reinversion"
                        )));
                    }
                    return Ok(sol);
                }
                log::debug!("reinverting tableau (primal {p:.3e}, dual {d:.3e})");
                reinversions += 1;
                tab.reinvert(sf)?;
                tab.set_objective(&sf.cost);
            }
        }
    }
}
