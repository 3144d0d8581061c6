use std::time::Instant;

use crate::linalg::{
    build_mn, norm2, CompleteGraphSylvester, DenseMatrix, SpectralSylvester, StepSizes,
    SylvesterSolve,
};
use crate::prox::{prox_in_place, ProxKind};

use super::{
    objective_at, AdmmState, FitError, FitReport, IterationRecord, PenaltyConfig, SolverKind,
    DIVERGENCE_LIMIT,
};

/// Which constraint blocks take part in the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Blocks {
    /// Row fusion, column fusion and feature sparsity.
    Sparse,
    /// Row and column fusion only.
    FusionOnly,
}

/// One prepared ADMM problem: data, step sizes, proximal scales of every
/// active edge and a Sylvester solver for the centroid update.
pub struct AdmmEngine<'a> {
    x: &'a DenseMatrix,
    config: &'a PenaltyConfig,
    blocks: Blocks,
    nu: StepSizes,
    solver: Box<dyn SylvesterSolve + Send + Sync>,
    row_sigma: Vec<f64>,
    col_sigma: Vec<f64>,
    feature_sigma: Vec<f64>,
}

impl<'a> AdmmEngine<'a> {
    pub fn new(x: &'a DenseMatrix, config: &'a PenaltyConfig, blocks: Blocks) -> Result<Self, FitError> {
        config.validate()?;
        let (n, p) = x.shape();
        let ws = &config.weights;
        if (ws.n, ws.p) != (n, p) {
            return Err(FitError::ShapeMismatch {
                expected: (ws.n, ws.p),
                found: (n, p),
            });
        }
        if !x.all_finite() {
            return Err(FitError::NonFiniteEncountered { iteration: 0 });
        }
        let mut nu = config.nu;
        match blocks {
            Blocks::Sparse if nu.nu3 <= 0.0 => {
                return Err(FitError::InvalidConfig(
                    "nu3 must be positive when the sparsity block is active".into(),
                ))
            }
            Blocks::FusionOnly => nu.nu3 = 0.0,
            Blocks::Sparse => {}
        }
        let solver: Box<dyn SylvesterSolve + Send + Sync> = match config.solver {
            SolverKind::CompleteGraph => Box::new(CompleteGraphSylvester::new(n, p, nu)?),
            SolverKind::Spectral => {
                let (m, big_n) = build_mn(n, p, nu)?;
                Box::new(SpectralSylvester::new(&m, &big_n)?)
            }
        };
        let (g1, g2, g3) = config.gammas();
        let row_sigma = ws.active_row_edges().map(|e| g1 * e.weight / nu.nu1).collect();
        let col_sigma = ws.active_col_edges().map(|e| g2 * e.weight / nu.nu2).collect();
        let feature_sigma = match blocks {
            Blocks::Sparse => ws.feature_factors.iter().map(|u| g3 * u / nu.nu3).collect(),
            Blocks::FusionOnly => vec![0.0; p],
        };
        Ok(Self {
            x,
            config,
            blocks,
            nu,
            solver,
            row_sigma,
            col_sigma,
            feature_sigma,
        })
    }

    /// Cold-start state for this problem.
    pub fn initial_state(&self) -> AdmmState {
        AdmmState::cold_start(self.x, &self.config.weights)
    }

    fn check_state(&self, state: &AdmmState) -> Result<(), FitError> {
        if state.a.shape() != self.x.shape() {
            return Err(FitError::ShapeMismatch {
                expected: self.x.shape(),
                found: state.a.shape(),
            });
        }
        if state.rows.len() != self.row_sigma.len() || state.cols.len() != self.col_sigma.len() {
            return Err(FitError::InvalidState(
                "edge blocks are not aligned with the active weights".into(),
            ));
        }
        Ok(())
    }

    /// Right-hand side `H` of `M·A + A·N = H` at the current slacks and
    /// multipliers. Zero-weight pairs enter through the complete-graph
    /// Laplacian applied to the current `A`, which is where their implied
    /// slacks sit.
    pub fn assemble_rhs(&self, state: &AdmmState) -> Result<DenseMatrix, FitError> {
        self.check_state(state)?;
        let (n, p) = self.x.shape();
        let StepSizes { nu1, nu2, nu3 } = self.nu;
        let a = &state.a;
        let mut h = self.x.clone();

        let mut col_sum = vec![0.0; p];
        let mut row_sum = vec![0.0; n];
        for i in 0..n {
            let row = a.row(i);
            row_sum[i] = row.iter().sum();
            for (c, v) in col_sum.iter_mut().zip(row) {
                *c += v;
            }
        }
        for i in 0..n {
            let rs = row_sum[i];
            let a_row = a.row(i);
            for ((hv, &av), &cs) in h.row_mut(i).iter_mut().zip(a_row).zip(&col_sum) {
                *hv += nu1 * (n as f64 * av - cs) + nu2 * (p as f64 * av - rs);
            }
        }

        let mut t = vec![0.0; p];
        for (e, &(i, j)) in state.rows.pairs.iter().enumerate() {
            let (slack, dual) = (state.rows.slack(e), state.rows.dual(e));
            for k in 0..p {
                t[k] = dual[k] + nu1 * (slack[k] - (a[(i, k)] - a[(j, k)]));
            }
            h.row_mut(i).iter_mut().zip(&t).for_each(|(hv, tv)| *hv += tv);
            h.row_mut(j).iter_mut().zip(&t).for_each(|(hv, tv)| *hv -= tv);
        }

        if !state.cols.is_empty() {
            let at = a.transpose();
            let mut ht = DenseMatrix::zeros(p, n);
            let mut t = vec![0.0; n];
            for (e, &(i, j)) in state.cols.pairs.iter().enumerate() {
                let (slack, dual) = (state.cols.slack(e), state.cols.dual(e));
                let (ai, aj) = (at.row(i), at.row(j));
                for r in 0..n {
                    t[r] = dual[r] + nu2 * (slack[r] - (ai[r] - aj[r]));
                }
                ht.row_mut(i).iter_mut().zip(&t).for_each(|(hv, tv)| *hv += tv);
                ht.row_mut(j).iter_mut().zip(&t).for_each(|(hv, tv)| *hv -= tv);
            }
            for r in 0..n {
                for (c, hv) in h.row_mut(r).iter_mut().enumerate() {
                    *hv += ht[(c, r)];
                }
            }
        }

        if self.blocks == Blocks::Sparse {
            for j in 0..p {
                let g = state.feature_slack.row(j);
                let l = state.feature_dual.row(j);
                for r in 0..n {
                    h[(r, j)] += l[r] + nu3 * g[r];
                }
            }
        }
        Ok(h)
    }

    /// Centroid update: the minimizer of the augmented Lagrangian in `A`.
    pub fn a_update(&self, state: &AdmmState) -> Result<DenseMatrix, FitError> {
        let h = self.assemble_rhs(state)?;
        Ok(self.solver.solve(&h)?)
    }

    /// Proximal updates of V, Z and G at the current `A` using the previous
    /// multipliers.
    pub fn vzg_update(&self, state: &mut AdmmState) -> Result<(), FitError> {
        self.check_state(state)?;
        let StepSizes { nu1, nu2, nu3 } = self.nu;
        let q: ProxKind = self.config.q;
        let a = &state.a;
        let at = a.transpose();

        let p = state.rows.dim;
        for (e, &(i, j)) in state.rows.pairs.iter().enumerate() {
            let range = e * p..(e + 1) * p;
            let dual = &state.rows.dual[range.clone()];
            let slack = &mut state.rows.slack[range];
            for k in 0..p {
                slack[k] = a[(i, k)] - a[(j, k)] - dual[k] / nu1;
            }
            prox_in_place(slack, self.row_sigma[e], q)?;
        }

        let n = state.cols.dim;
        for (e, &(i, j)) in state.cols.pairs.iter().enumerate() {
            let range = e * n..(e + 1) * n;
            let dual = &state.cols.dual[range.clone()];
            let slack = &mut state.cols.slack[range];
            let (ai, aj) = (at.row(i), at.row(j));
            for r in 0..n {
                slack[r] = ai[r] - aj[r] - dual[r] / nu2;
            }
            prox_in_place(slack, self.col_sigma[e], q)?;
        }

        if self.blocks == Blocks::Sparse {
            for j in 0..at.rows() {
                let aj = at.row(j).to_vec();
                let dual = state.feature_dual.row(j).to_vec();
                let g = state.feature_slack.row_mut(j);
                for r in 0..aj.len() {
                    g[r] = aj[r] - dual[r] / nu3;
                }
                prox_in_place(g, self.feature_sigma[j], ProxKind::L2)?;
            }
        }
        Ok(())
    }

    /// Dual ascent. Returns the largest constraint violation `(r_V, r_Z, r_G)`
    /// measured before the multipliers move.
    pub fn dual_update(&self, state: &mut AdmmState) -> Result<(f64, f64, f64), FitError> {
        self.check_state(state)?;
        let StepSizes { nu1, nu2, nu3 } = self.nu;
        let a = &state.a;
        let at = a.transpose();

        let mut r_v: f64 = 0.0;
        let p = state.rows.dim;
        let mut r = vec![0.0; p];
        for (e, &(i, j)) in state.rows.pairs.iter().enumerate() {
            let range = e * p..(e + 1) * p;
            let slack = &state.rows.slack[range.clone()];
            for k in 0..p {
                r[k] = slack[k] - (a[(i, k)] - a[(j, k)]);
            }
            r_v = r_v.max(norm2(&r));
            for (d, rv) in state.rows.dual[range].iter_mut().zip(&r) {
                *d += nu1 * rv;
            }
        }

        let mut r_z: f64 = 0.0;
        let n = state.cols.dim;
        let mut r = vec![0.0; n];
        for (e, &(i, j)) in state.cols.pairs.iter().enumerate() {
            let range = e * n..(e + 1) * n;
            let slack = &state.cols.slack[range.clone()];
            let (ai, aj) = (at.row(i), at.row(j));
            for k in 0..n {
                r[k] = slack[k] - (ai[k] - aj[k]);
            }
            r_z = r_z.max(norm2(&r));
            for (d, rv) in state.cols.dual[range].iter_mut().zip(&r) {
                *d += nu2 * rv;
            }
        }

        let mut r_g: f64 = 0.0;
        if self.blocks == Blocks::Sparse {
            for j in 0..at.rows() {
                let aj = at.row(j);
                let g = state.feature_slack.row(j);
                for k in 0..n {
                    r[k] = g[k] - aj[k];
                }
                r_g = r_g.max(norm2(&r));
                for (d, rv) in state.feature_dual.row_mut(j).iter_mut().zip(&r) {
                    *d += nu3 * rv;
                }
            }
        }
        Ok((r_v, r_z, r_g))
    }

    /// One full iteration; updates `state` in place.
    pub fn step(&self, state: &mut AdmmState) -> Result<IterationRecord, FitError> {
        let next = self.a_update(state)?;
        let iteration = state.iterations + 1;
        if !next.all_finite() || next.max_abs() > DIVERGENCE_LIMIT {
            return Err(FitError::NonFiniteEncountered { iteration });
        }
        let prev_norm = state.a.frobenius_norm();
        let change = next.sub(&state.a)?.frobenius_norm();
        state.a = next;
        self.vzg_update(state)?;
        let (r_v, r_z, r_g) = self.dual_update(state)?;
        state.iterations = iteration;
        let record = IterationRecord {
            r_v,
            r_z,
            r_g,
            delta_a: change / prev_norm.max(1.0),
        };
        state.history.push(record);
        Ok(record)
    }

    pub fn run(&self, init: Option<&AdmmState>) -> Result<FitReport, FitError> {
        let started = Instant::now();
        let mut state = match init {
            Some(s) => s.aligned_to(&self.config.weights)?,
            None => self.initial_state(),
        };
        let mut converged = false;
        while state.iterations < self.config.max_iter {
            let record = self.step(&mut state)?;
            let scale = state.a.frobenius_norm().max(1.0);
            let residual = record.r_v.max(record.r_z).max(record.r_g);
            if record.delta_a <= self.config.tol && residual <= self.config.tol * scale {
                converged = true;
                break;
            }
        }
        let objective = match self.blocks {
            Blocks::Sparse => objective_at(self.x, &state.a, self.config)?,
            Blocks::FusionOnly => {
                let mut cfg = self.config.clone();
                cfg.gamma3 = 0.0;
                objective_at(self.x, &state.a, &cfg)?
            }
        };
        Ok(FitReport {
            iterations: state.iterations,
            state,
            objective,
            converged,
            wall_time: started.elapsed(),
        })
    }
}
