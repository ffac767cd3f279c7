//! Random-intercept linear mixed model fit by REML.
//!
//! The model is `y = Xβ + Zu + ε` with one random intercept per group,
//! `u ~ N(0, σu²)`, `ε ~ N(0, σ²)`. Writing `λ = σu²/σ²` and `V = I + λZZᵀ`,
//! σ² and β profile out of the REML likelihood, leaving a one-dimensional
//! criterion in λ:
//!
//! ```text
//! ℓR(λ) = −½ [ log|V| + log|XᵀV⁻¹X| + (n − p)·log(rᵀV⁻¹r) ]
//! ```
//!
//! `V` is block diagonal, and each block `I + λJ` has the closed-form inverse
//! `I − λ/(1 + λ·n_j)·J` and determinant `1 + λ·n_j`, so nothing larger than
//! `p × p` is ever factorized.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{bonferroni, bonferroni_rounded, MetricRow, PValueMethod, StatsError};
use crate::chat::Level;

const LOG_LAMBDA_MIN: f64 = -18.420680743952367; // ln 1e-8
const LOG_LAMBDA_MAX: f64 = 18.420680743952367; // ln 1e8
const GRID_POINTS: usize = 17;
const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 200;
const RANK_TOLERANCE: f64 = 1e-10;
/// Residual sums of squares below this fraction of `yᵀy` count as an exact fit.
const RESIDUAL_TOLERANCE: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub term: String,
    pub estimate: f64,
    pub se: f64,
    pub t: f64,
    pub p_raw: f64,
    pub p_adj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmmFit {
    pub terms: Vec<TermEstimate>,
    pub sigma_u2: f64,
    pub sigma2: f64,
    pub lambda: f64,
    pub reml: f64,
    pub n_obs: usize,
    pub n_groups: usize,
    /// Degrees of freedom used by [`PValueMethod::BetweenGroupsT`].
    pub df_between: usize,
    pub p_method: PValueMethod,
    pub converged: bool,
}

impl LmmFit {
    pub fn term(&self, name: &str) -> Option<&TermEstimate> {
        self.terms.iter().find(|t| t.term == name)
    }

    /// Sets `p_adj` on every term by Bonferroni with `m` tests, optionally
    /// rounding the raw p-values first.
    pub fn adjust(&mut self, m: usize, round_raw: Option<u32>) {
        let raw: Vec<f64> = self.terms.iter().map(|t| t.p_raw).collect();
        let adj = match round_raw {
            Some(d) => bonferroni_rounded(&raw, m, d),
            None => bonferroni(&raw, m),
        };
        for (t, p) in self.terms.iter_mut().zip(adj) {
            t.p_adj = p;
        }
    }
}

/// Response, fixed-effects design and group membership for one fit.
#[derive(Debug, Clone)]
pub struct GroupedDesign {
    y: DVector<f64>,
    x: DMatrix<f64>,
    groups: Vec<usize>,
    n_groups: usize,
    term_names: Vec<String>,
    group_labels: Vec<String>,
}

/// λ-independent pieces of the criterion.
struct Parts {
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    group_n: Vec<f64>,
    group_x: Vec<DVector<f64>>,
    group_y: Vec<f64>,
}

struct Evaluation {
    reml: f64,
    beta: DVector<f64>,
    a_inv: DMatrix<f64>,
    rvr: f64,
}

impl GroupedDesign {
    /// `groups[i]` is the 0-based group of observation `i`; every group index
    /// below the maximum must occur.
    pub fn new(y: Vec<f64>, x: DMatrix<f64>, groups: Vec<usize>, term_names: Vec<String>) -> Result<Self, StatsError> {
        let n = y.len();
        if x.nrows() != n || groups.len() != n || term_names.len() != x.ncols() {
            return Err(StatsError::InsufficientData("design dimensions do not match".into()));
        }
        let n_groups = groups.iter().max().map_or(0, |&g| g + 1);
        let mut seen = vec![false; n_groups];
        for &g in &groups {
            seen[g] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(StatsError::InsufficientData("empty group index".into()));
        }
        let group_labels = (0..n_groups).map(|g| g.to_string()).collect();
        Ok(Self { y: DVector::from_vec(y), x, groups, n_groups, term_names, group_labels })
    }

    /// `value ~ level + (1 | chat_id)` with the lowest level present as the
    /// reference. Groups are ordered by chat id.
    pub fn from_rows<'a, I>(rows: I) -> Result<Self, StatsError>
    where
        I: IntoIterator<Item = &'a MetricRow>,
    {
        let rows: Vec<&MetricRow> = rows.into_iter().collect();
        if rows.is_empty() {
            return Err(StatsError::InsufficientData("no rows to fit".into()));
        }
        let chats: BTreeMap<&str, usize> = {
            let mut ids: Vec<&str> = rows.iter().map(|r| r.chat_id.as_str()).collect();
            ids.sort_unstable();
            ids.dedup();
            ids.into_iter().enumerate().map(|(i, c)| (c, i)).collect()
        };
        let mut levels: Vec<Level> = rows.iter().map(|r| r.level).collect();
        levels.sort();
        levels.dedup();
        let contrasts = &levels[1..];
        let p = 1 + contrasts.len();
        let mut x = DMatrix::zeros(rows.len(), p);
        for (i, r) in rows.iter().enumerate() {
            x[(i, 0)] = 1.0;
            if let Some(k) = contrasts.iter().position(|&l| l == r.level) {
                x[(i, k + 1)] = 1.0;
            }
        }
        let mut term_names = vec!["(Intercept)".to_string()];
        term_names.extend(contrasts.iter().map(|l| format!("level{l}")));
        let groups = rows.iter().map(|r| chats[r.chat_id.as_str()]).collect();
        let mut d = Self::new(rows.iter().map(|r| r.value).collect(), x, groups, term_names)?;
        d.group_labels = chats.keys().map(|s| s.to_string()).collect();
        Ok(d)
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn group_labels(&self) -> &[String] {
        &self.group_labels
    }

    fn check(&self) -> Result<(), StatsError> {
        if self.n_groups < 2 {
            return Err(StatsError::TooFewGroups { groups: self.n_groups });
        }
        let p = self.x.ncols();
        if self.n_obs() <= p {
            return Err(StatsError::RankDeficient);
        }
        let sv = self.x.clone().svd(false, false).singular_values;
        let max = sv.max();
        if !(max > 0.0) || sv.min() / max < RANK_TOLERANCE {
            return Err(StatsError::RankDeficient);
        }
        Ok(())
    }

    fn parts(&self) -> Parts {
        let p = self.x.ncols();
        let mut group_n = vec![0.0; self.n_groups];
        let mut group_x = vec![DVector::zeros(p); self.n_groups];
        let mut group_y = vec![0.0; self.n_groups];
        for (i, &g) in self.groups.iter().enumerate() {
            group_n[g] += 1.0;
            group_y[g] += self.y[i];
            for k in 0..p {
                group_x[g][k] += self.x[(i, k)];
            }
        }
        Parts { xtx: self.x.transpose() * &self.x, xty: self.x.transpose() * &self.y, group_n, group_x, group_y }
    }

    fn evaluate(&self, parts: &Parts, lambda: f64) -> Result<Evaluation, StatsError> {
        let n = self.n_obs() as f64;
        let p = self.x.ncols() as f64;
        let mut a = parts.xtx.clone();
        let mut b = parts.xty.clone();
        let mut log_det_v = 0.0;
        let mut shrink = vec![0.0; self.n_groups];
        for g in 0..self.n_groups {
            let d = 1.0 + lambda * parts.group_n[g];
            if !(d > 0.0) {
                return Err(StatsError::SingularBlock { lambda });
            }
            log_det_v += d.ln();
            let c = lambda / d;
            shrink[g] = c;
            a -= c * &parts.group_x[g] * parts.group_x[g].transpose();
            b -= c * parts.group_y[g] * &parts.group_x[g];
        }
        let chol = a.clone().cholesky().ok_or(StatsError::SingularBlock { lambda })?;
        let log_det_a: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
        let beta = chol.solve(&b);
        let r = &self.y - &self.x * &beta;
        let mut group_r = vec![0.0; self.n_groups];
        for (i, &g) in self.groups.iter().enumerate() {
            group_r[g] += r[i];
        }
        let rvr = r.norm_squared() - group_r.iter().zip(&shrink).map(|(s, c)| c * s * s).sum::<f64>();
        if !(rvr > RESIDUAL_TOLERANCE * self.y.norm_squared()) {
            return Err(StatsError::SingularBlock { lambda });
        }
        let reml = -0.5 * (log_det_v + log_det_a + (n - p) * rvr.ln());
        Ok(Evaluation { reml, beta, a_inv: chol.inverse(), rvr })
    }

    /// The profiled REML criterion at `lambda`, up to an additive constant.
    pub fn reml_criterion(&self, lambda: f64) -> Result<f64, StatsError> {
        self.check()?;
        Ok(self.evaluate(&self.parts(), lambda)?.reml)
    }

    /// Fit with λ held fixed; `lambda = 0` is ordinary least squares.
    pub fn fit_at_lambda(&self, lambda: f64, method: PValueMethod) -> Result<LmmFit, StatsError> {
        self.check()?;
        let parts = self.parts();
        let eval = self.evaluate(&parts, lambda)?;
        Ok(self.summarize(eval, lambda, method))
    }

    /// REML fit: coarse grid over log λ, golden-section refinement around the
    /// best grid point, and a comparison with the boundary λ = 0.
    pub fn fit(&self, method: PValueMethod) -> Result<LmmFit, StatsError> {
        self.check()?;
        let parts = self.parts();
        if let Err(StatsError::SingularBlock { .. }) = self.evaluate(&parts, 0.0) {
            return Err(StatsError::InsufficientData("the fixed effects reproduce the response exactly".into()));
        }
        let f = |x: f64| self.evaluate(&parts, x.exp()).map(|e| e.reml);

        let step = (LOG_LAMBDA_MAX - LOG_LAMBDA_MIN) / (GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..GRID_POINTS).map(|i| LOG_LAMBDA_MIN + step * i as f64).collect();
        let mut best = None::<(usize, f64)>;
        for (i, &x) in grid.iter().enumerate() {
            let v = f(x)?;
            if v.is_finite() && best.map_or(true, |(_, bv)| v > bv) {
                best = Some((i, v));
            }
        }
        let (k, _) = best.ok_or(StatsError::NonConvergence { iterations: 0 })?;
        let mut lo = grid[k.saturating_sub(1)];
        let mut hi = grid[(k + 1).min(GRID_POINTS - 1)];

        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = hi - inv_phi * (hi - lo);
        let mut d = lo + inv_phi * (hi - lo);
        let (mut fc, mut fd) = (f(c)?, f(d)?);
        let mut iterations = 0;
        while hi - lo > TOLERANCE {
            if iterations == MAX_ITERATIONS {
                return Err(StatsError::NonConvergence { iterations });
            }
            iterations += 1;
            if fc >= fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - inv_phi * (hi - lo);
                fc = f(c)?;
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + inv_phi * (hi - lo);
                fd = f(d)?;
            }
        }
        let mut lambda = (0.5 * (lo + hi)).exp();
        let mut eval = self.evaluate(&parts, lambda)?;
        if k == 0 {
            let boundary = self.evaluate(&parts, 0.0)?;
            if boundary.reml >= eval.reml {
                lambda = 0.0;
                eval = boundary;
            }
        }
        tracing::debug!(lambda, iterations, reml = eval.reml, "REML search finished");
        Ok(self.summarize(eval, lambda, method))
    }

    fn summarize(&self, eval: Evaluation, lambda: f64, method: PValueMethod) -> LmmFit {
        let n = self.n_obs();
        let p = self.x.ncols();
        let sigma2 = eval.rvr / (n - p) as f64;
        let df_between = self.n_groups.saturating_sub(p);
        let terms = self
            .term_names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let estimate = eval.beta[k];
                let se = (sigma2 * eval.a_inv[(k, k)]).sqrt();
                let t = estimate / se;
                let p_raw = method.two_sided(t, df_between as f64);
                TermEstimate { term: name.clone(), estimate, se, t, p_raw, p_adj: p_raw }
            })
            .collect();
        LmmFit {
            terms,
            sigma_u2: lambda * sigma2,
            sigma2,
            lambda,
            reml: eval.reml,
            n_obs: n,
            n_groups: self.n_groups,
            df_between,
            p_method: method,
            converged: true,
        }
    }
}

/// `value ~ level + (1 | chat_id)` with normal-approximation p-values.
pub fn fit_lmm<'a, I>(rows: I) -> Result<LmmFit, StatsError>
where
    I: IntoIterator<Item = &'a MetricRow>,
{
    fit_lmm_with(rows, PValueMethod::Normal)
}

pub fn fit_lmm_with<'a, I>(rows: I, method: PValueMethod) -> Result<LmmFit, StatsError>
where
    I: IntoIterator<Item = &'a MetricRow>,
{
    GroupedDesign::from_rows(rows)?.fit(method)
}
