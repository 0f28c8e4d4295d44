//! ε-halving ladders: primitive-area scale study, residual decay and
//! convergence against the characteristics oracle.

use rayon::prelude::*;

use crate::cascade::{Family, Operators, Polynomial, SchemeParams, Smoothing};
use crate::diagnostics::{
    characteristics_oracle, estimate_delta_power, fit_log_slope, shock_area, sup_error,
    weak_residual, Equation, ResidualReport,
};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::integrator::{Divergence, Simulation};
use crate::output::format_report;
use crate::profile::{Analytic, InitialData};
use crate::scenario::Scenario;

/// Default cap on cells per axis for the finest level.
pub const DEFAULT_CELL_CAP: usize = 1 << 20;

/// Number of worker threads from `DSHOCK_THREADS` (0 or unset means automatic).
pub fn thread_count() -> usize {
    std::env::var("DSHOCK_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// A scenario template run at `ε_k = 2π/(N₀·2^k)`, `N₀ = round(2π/eps_start)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LadderSpec {
    pub eps_start: f64,
    pub levels: usize,
    pub scenario: Scenario,
    pub cell_cap: usize,
}

impl LadderSpec {
    pub fn new(scenario: Scenario, eps_start: f64, levels: usize) -> Result<Self> {
        let spec = Self {
            eps_start,
            levels,
            scenario,
            cell_cap: DEFAULT_CELL_CAP,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels < 3 {
            return Err(Error::InvalidLadder(format!(
                "a ladder needs at least 3 levels (got {})",
                self.levels
            )));
        }
        if !(self.eps_start.is_finite() && self.eps_start > 0.0 && self.eps_start < 1.0) {
            return Err(Error::InvalidLadder(format!(
                "eps_start must lie in (0, 1) (got {})",
                self.eps_start
            )));
        }
        let finest = self.base_cells().saturating_mul(
            1usize
                .checked_shl(self.levels as u32 - 1)
                .unwrap_or(usize::MAX),
        );
        if finest > self.cell_cap {
            return Err(Error::InvalidLadder(format!(
                "the finest level needs {finest} cells per axis, above the cap of {}",
                self.cell_cap
            )));
        }
        Ok(())
    }

    fn base_cells(&self) -> usize {
        (std::f64::consts::TAU / self.eps_start).round() as usize
    }

    /// `ε` of every level (each exactly the grid spacing, halving exactly).
    pub fn epsilons(&self) -> Vec<f64> {
        let n0 = self.base_cells() as f64;
        (0..self.levels)
            .map(|k| std::f64::consts::TAU / (n0 * 2f64.powi(k as i32)))
            .collect()
    }

    pub fn level_scenarios(&self) -> Vec<Scenario> {
        self.epsilons()
            .into_iter()
            .map(|e| self.scenario.with_epsilon(e))
            .collect()
    }

    /// Maps `f` over the levels on a pool bounded by `DSHOCK_THREADS`;
    /// results keep level order.
    pub fn map_levels<R, F>(&self, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&Scenario) -> Result<R> + Sync,
    {
        let scenarios = self.level_scenarios();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(thread_count())
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
        pool.install(|| scenarios.par_iter().map(&f).collect())
    }
}

/// Adjusts a template to source degree `n`: `P = c·vⁿ` keeping the leading
/// coefficient, and the exponents replaced by the defaults when the
/// template's values violate the constraints for `n`.
pub fn scenario_for_degree(template: &Scenario, n: usize) -> Scenario {
    let mut s = template.clone();
    let lead = match template.system.p.leading() {
        c if c != 0.0 => c,
        _ => 1.0,
    };
    s.system.p = Polynomial::monomial(n, lead);
    if s.params.validate(n, s.system.has_z()).is_err() {
        let (alpha, beta, gamma) = SchemeParams::default_exponents(n, s.system.has_z());
        s.params.alpha = alpha;
        s.params.beta = beta;
        s.params.gamma = gamma;
    }
    s
}

/// One level of a scale study.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleLevel {
    pub epsilon: f64,
    /// `None` when the level diverged.
    pub area: Option<f64>,
    pub diverged: Option<Divergence>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleStudyReport {
    pub n: usize,
    pub scenario: Scenario,
    pub levels: Vec<ScaleLevel>,
    /// `A(ε/2)/A(ε)` for consecutive levels (`None` if either diverged).
    pub ratios: Vec<Option<f64>>,
    /// Mean of `1 + log₂(ratio)` over surviving pairs.
    pub alpha_hat: Option<f64>,
}

impl ScaleStudyReport {
    pub fn mean_ratio(&self) -> Option<f64> {
        let r: Vec<f64> = self.ratios.iter().flatten().copied().collect();
        (!r.is_empty()).then(|| r.iter().sum::<f64>() / r.len() as f64)
    }

    /// CSV with columns `epsilon,area,ratio,alpha_hat` (per-pair estimate;
    /// `NaN` where undefined) and the parameters as `#` comments.
    pub fn to_csv(&self) -> String {
        let nan = f64::NAN;
        let eps: Vec<f64> = self.levels.iter().map(|l| l.epsilon).collect();
        let area: Vec<f64> = self.levels.iter().map(|l| l.area.unwrap_or(nan)).collect();
        let mut ratio = vec![nan];
        ratio.extend(self.ratios.iter().map(|r| r.unwrap_or(nan)));
        let per_pair: Vec<f64> = ratio.iter().map(|r| 1.0 + r.log2()).collect();
        let mut pre = parameter_lines(&self.scenario);
        pre.insert(0, format!("n = {}", self.n));
        pre.push(format!(
            "alpha_hat_mean = {}",
            self.alpha_hat.map_or("NaN".into(), |a| format!("{a:.16e}"))
        ));
        for l in &self.levels {
            if let Some(d) = &l.diverged {
                pre.push(format!(
                    "diverged: epsilon = {:e}, t = {:e}, field = {}",
                    l.epsilon, d.time, d.field
                ));
            }
        }
        format_report(
            &pre,
            &["epsilon", "area", "ratio", "alpha_hat"],
            &[eps, area, ratio, per_pair],
        )
    }
}

fn parameter_lines(s: &Scenario) -> Vec<String> {
    let p = &s.params;
    let mut out = vec![
        format!("scenario = {}", s.name),
        format!("family = {}", s.system.family.name()),
        format!("a = {}, b = {}, c = {}", s.system.a, s.system.b, s.system.c),
        format!("p = {:?}", s.system.p.coeffs()),
        format!("alpha = {}", p.alpha),
        format!("beta = {}", p.beta),
    ];
    if let Some(g) = p.gamma {
        out.push(format!("gamma = {g}"));
    }
    out.push(match p.smoothing {
        Smoothing::Power => "smoothing = power".to_string(),
        Smoothing::Cells(k) => format!("smoothing = cells ({k})"),
    });
    out.push(format!("bump = {}", p.bump.name()));
    out.push(format!("cfl = {}", p.cfl));
    out.push(format!("t_end = {}", s.t_end));
    out
}

/// Runs a 1-D cascade template (degree set to `n`) along the ladder and
/// measures the primitive area of `w` at `t_end`.
pub fn run_scale_study(spec: &LadderSpec, n: usize) -> Result<ScaleStudyReport> {
    spec.validate()?;
    let family = spec.scenario.system.family;
    if !matches!(family, Family::Ps3 | Family::Ps4) {
        return Err(Error::validation(
            "system.family",
            "the scale study needs a 1-D cascade with a w equation",
        ));
    }
    let template = scenario_for_degree(&spec.scenario, n);
    template.validate()?;
    let spec = LadderSpec {
        scenario: template.clone(),
        ..spec.clone()
    };
    let levels = spec.map_levels(|s| {
        let traj = Simulation::<f64>::new(s)?.run()?;
        let epsilon = s.effective()?.params.epsilon;
        if let Some(d) = traj.diverged {
            return Ok(ScaleLevel {
                epsilon,
                area: None,
                diverged: Some(d),
            });
        }
        let last = traj
            .last()
            .ok_or_else(|| Error::InsufficientData("no snapshot".into()))?;
        let w = last
            .state
            .w
            .as_ref()
            .ok_or_else(|| Error::InsufficientData("run has no w field".into()))?;
        Ok(ScaleLevel {
            epsilon,
            area: Some(shock_area(w)?),
            diverged: None,
        })
    })?;
    let ratios: Vec<Option<f64>> = levels
        .windows(2)
        .map(|p| match (p[0].area, p[1].area) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some(b / a),
            _ => None,
        })
        .collect();
    let alpha_hat = if ratios.iter().all(Option::is_some) {
        let ladder: Vec<(f64, f64)> = levels
            .iter()
            .map(|l| (l.epsilon, l.area.unwrap_or(0.0)))
            .collect();
        Some(estimate_delta_power(&ladder)?)
    } else {
        let pairs: Vec<f64> = ratios.iter().flatten().map(|r| 1.0 + r.log2()).collect();
        (!pairs.is_empty()).then(|| pairs.iter().sum::<f64>() / pairs.len() as f64)
    };
    Ok(ScaleStudyReport {
        n,
        scenario: template,
        levels,
        ratios,
        alpha_hat,
    })
}

/// Snapshot count used by the residual study (uniform in `[0, t_end]`).
pub const RESIDUAL_SNAPSHOTS: usize = 5;

/// Weak residual of `equation` (test modes up to `k_max`) at every level.
pub fn run_residual_study(
    spec: &LadderSpec,
    equation: Equation,
    k_max: u32,
) -> Result<ResidualReport> {
    spec.validate()?;
    let residuals = spec.map_levels(|s| {
        let mut s = s.clone();
        s.snapshots = (0..RESIDUAL_SNAPSHOTS)
            .map(|i| s.t_end * i as f64 / (RESIDUAL_SNAPSHOTS - 1) as f64)
            .collect();
        let mut sim = Simulation::<f64>::new(&s)?;
        let traj = sim.run()?;
        if let Some(d) = &traj.diverged {
            return Err(Error::BlowUp {
                time: d.time,
                field: d.field.clone(),
                magnitude: d.magnitude,
            });
        }
        weak_residual(sim.operators(), &traj, equation, k_max)
    })?;
    let eps = spec.epsilons();
    ResidualReport::new(eps, residuals)
}

impl ResidualReport {
    /// CSV with columns `epsilon,residual` and the parameters as `#` comments.
    pub fn to_csv(&self, scenario: &Scenario, equation: Equation) -> String {
        let mut pre = parameter_lines(scenario);
        pre.insert(0, format!("equation = {}", equation.name()));
        pre.push(format!("exponent = {:.16e}", self.exponent));
        format_report(
            &pre,
            &["epsilon", "residual"],
            &[self.epsilons.clone(), self.residuals.clone()],
        )
    }
}

/// Sup-errors against the characteristics oracle along a ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub errors: Vec<f64>,
    /// Fitted order (`None` when some error is exactly zero).
    pub order: Option<f64>,
}

impl ConvergenceReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.errors.windows(2).map(|p| p[1] / p[0]).collect()
    }
}

/// Compares the raw transported density at `t_end` with the characteristics
/// solution for a prescribed (time-independent) velocity.
pub fn run_convergence_study(spec: &LadderSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let s0 = &spec.scenario;
    if s0.system.family.dimension() != 1 || s0.system.family == Family::Nonlinear {
        return Err(Error::validation(
            "system.family",
            "the convergence study needs a 1-D cascade",
        ));
    }
    let v0 = match &s0.initial.density {
        InitialData::Analytic(a) => a.clone(),
        InitialData::Zero => Analytic::constant(0.0),
        InitialData::Riemann { .. } => {
            return Err(Error::validation(
                "initial.density",
                "the characteristics oracle needs smooth initial data",
            ))
        }
    };
    let errors = spec.map_levels(|s| {
        let s = s.effective()?;
        let grid: Grid<f64> = s.grid()?;
        let oracle = characteristics_oracle(&s.velocity, s.system.b, &v0, grid, s.t_end)?;
        let traj = Simulation::<f64>::new(&s)?.run()?;
        if let Some(d) = &traj.diverged {
            return Err(Error::BlowUp {
                time: d.time,
                field: d.field.clone(),
                magnitude: d.magnitude,
            });
        }
        let last = traj
            .last()
            .ok_or_else(|| Error::InsufficientData("no snapshot".into()))?;
        sup_error(&last.state.density_raw, &oracle)
    })?;
    let epsilons = spec.epsilons();
    let order = errors
        .iter()
        .all(|&e| e > 0.0)
        .then(|| fit_log_slope(&epsilons, &errors));
    Ok(ConvergenceReport {
        epsilons,
        errors,
        order,
    })
}

/// Builds the operators of a level (for diagnostics outside a run).
pub fn level_operators(s: &Scenario) -> Result<Operators<f64>> {
    let s = s.effective()?;
    let grid: Grid<f64> = s.grid()?;
    Operators::new(&grid, &s.params, &s.system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    fn advect(u: &str, density: &str) -> Scenario {
        parse_scenario(&format!(
            r#"
system.family = "ps3"
system.b = 1.0
system.p = [0]
scheme.epsilon = 0.01
scheme.alpha = 0.3
scheme.beta = 0.15
scheme.smoothing = "cells"
scheme.smoothing_cells = 3
scheme.cfl = 0.5
velocity.kind = "prescribed"
velocity.terms = {u}
initial.density.kind = "analytic"
initial.density.terms = {density}
run.t_end = 0.1
"#
        ))
        .unwrap()
    }

    #[test]
    fn ladder_validation() {
        let s = advect("[[\"const\", 2.0]]", "[[\"const\", 1.0]]");
        assert!(LadderSpec::new(s.clone(), 4e-3, 2).is_err());
        assert!(LadderSpec::new(s.clone(), 4e-3, 4).is_ok());
        let mut big = LadderSpec::new(s, 4e-3, 4).unwrap();
        big.cell_cap = 10_000;
        assert!(matches!(big.validate(), Err(Error::InvalidLadder(_))));
        let e = LadderSpec::new(big.scenario.clone(), 4e-3, 4)
            .unwrap()
            .epsilons();
        assert_eq!(e.len(), 4);
        for p in e.windows(2) {
            assert_eq!(p[1] * 2.0, p[0]);
        }
    }

    #[test]
    fn degree_substitution_keeps_valid_exponents() {
        let mut s = advect("[[\"const\", 2.0]]", "[[\"const\", 1.0]]");
        s.system.p = Polynomial::monomial(2, 1.0);
        let s3 = scenario_for_degree(&s, 3);
        assert_eq!(s3.system.p, Polynomial::monomial(3, 1.0));
        assert!((s3.params.alpha - 0.225).abs() < 1e-15);
        let s2 = scenario_for_degree(&s, 2);
        assert_eq!(s2.params.alpha, 0.3);
    }

    #[test]
    fn zero_initial_data_has_zero_errors() {
        let s = advect("[[\"const\", 2.0]]", "[]");
        let mut s = s;
        s.initial.density = InitialData::Zero;
        let r = run_convergence_study(&LadderSpec::new(s, 0.02, 3).unwrap()).unwrap();
        assert!(r.errors.iter().all(|&e| e == 0.0));
        assert_eq!(r.order, None);
    }

    #[test]
    fn levels_run_independently() {
        let s = advect(
            "[[\"const\", 2.0], [\"sin\", 1.0, 1]]",
            "[[\"const\", 1.0], [\"sin\", 0.5, 1]]",
        );
        let spec = LadderSpec::new(s, 0.02, 3).unwrap();
        let batch = run_convergence_study(&spec).unwrap();
        for (k, lvl) in spec.level_scenarios().iter().enumerate() {
            let single = LadderSpec {
                scenario: lvl.clone(),
                eps_start: spec.epsilons()[k],
                levels: 3,
                cell_cap: DEFAULT_CELL_CAP,
            };
            let one = run_convergence_study(&single).unwrap();
            assert_eq!(one.errors[0].to_bits(), batch.errors[k].to_bits());
        }
    }
}
