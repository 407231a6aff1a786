//! Frame-size and PHY-mode selection: closed-form stationary points,
//! a dual (Lagrangian) search for the throughput-constrained case, and an
//! exhaustive grid search used as a reference.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, ModelError, Result};
use crate::metrics::{ModeModel, QosSpec, SystemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepRule {
    Constant,
    /// `alpha0 / (1 + l)` at iteration `l`.
    #[default]
    Diminishing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Initial multiplier step, s/bit. `None` uses `1 / (r0 n_s)`.
    pub alpha0: Option<f64>,
    pub step_rule: StepRule,
    /// Relative change in the frame size that ends the subgradient loop.
    pub delta: f64,
    pub max_iter: u32,
    /// Largest admissible PSDU, bits. Rounded down to whole codewords.
    pub n_t_max: u32,
    /// Relative throughput slack at which the multiplier refinement stops.
    pub refine_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alpha0: None,
            step_rule: StepRule::Diminishing,
            delta: 1e-3,
            max_iter: 200,
            n_t_max: 8190,
            refine_tol: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alpha0 {
            ensure_positive("solver.alpha0", a)?;
        }
        ensure_positive("solver.delta", self.delta)?;
        ensure_positive("solver.refine_tol", self.refine_tol)?;
        if self.max_iter == 0 {
            return Err(ModelError::Domain {
                name: "solver.max_iter",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        Ok(())
    }

    fn step(&self, alpha0: f64, l: u32) -> f64 {
        match self.step_rule {
            StepRule::Constant => alpha0,
            StepRule::Diminishing => alpha0 / (1.0 + f64::from(l)),
        }
    }
}

/// Admissible PSDU sizes: whole codewords from one up to `n_t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameGrid {
    pub step: u32,
    pub top: u32,
}

impl FrameGrid {
    pub fn new(step: u32, n_t_max: u32) -> Result<Self> {
        let top = n_t_max / step * step;
        if top == 0 {
            return Err(ModelError::InvalidFrame {
                n_t: n_t_max,
                n: step,
            });
        }
        Ok(FrameGrid { step, top })
    }

    pub fn len(&self) -> u32 {
        self.top / self.step
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> impl Iterator<Item = u32> + '_ {
        (1..=self.len()).map(move |k| k * self.step)
    }

    pub fn lower(&self) -> f64 {
        f64::from(self.step)
    }

    pub fn upper(&self) -> f64 {
        f64::from(self.top)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lower(), self.upper())
    }

    /// The grid points at or just below and at or just above `x` (clamped).
    pub fn neighbours(&self, x: f64) -> (u32, u32) {
        let k = (self.clamp(x) / self.lower()).floor() as u32;
        let lo = (k * self.step).clamp(self.step, self.top);
        let hi = if f64::from(lo) < self.clamp(x) {
            lo + self.step
        } else {
            lo
        };
        (lo, hi.min(self.top))
    }

    /// Grid points within `radius` steps of `x`.
    pub fn window(&self, x: f64, radius: u32) -> impl Iterator<Item = u32> + '_ {
        let (lo, hi) = self.neighbours(x);
        let first = lo.saturating_sub(radius * self.step).max(self.step);
        let last = (hi + radius * self.step).min(self.top);
        (first..=last).step_by(self.step as usize)
    }

    /// Of the two grid neighbours of `x`, the one with the larger objective.
    pub fn round_by(&self, x: f64, objective: impl Fn(u32) -> f64) -> u32 {
        let (lo, hi) = self.neighbours(x);
        if objective(hi) > objective(lo) {
            hi
        } else {
            lo
        }
    }
}

/// Positive root of `per_bit s n^2 + fixed s n + fixed`, `s = ln p_cw / n_code`,
/// i.e. the maximizer of `n p_cw^(n / n_code) / (per_bit n + fixed)`.
///
/// Written as `x / (sqrt(a^2 + x) + a)` so it stays accurate when
/// `ln p_cw` is tiny.
pub fn stationary_frame_size(fixed: f64, per_bit: f64, ln_p_cw: f64, n_code: u32) -> f64 {
    if ln_p_cw == 0.0 {
        return f64::INFINITY;
    }
    if fixed == 0.0 || ln_p_cw == f64::NEG_INFINITY {
        return 0.0;
    }
    let a = fixed / (2.0 * per_bit);
    let x = -f64::from(n_code) * fixed / (per_bit * ln_p_cw);
    if !x.is_finite() {
        return f64::INFINITY;
    }
    x / ((a * a + x).sqrt() + a)
}

/// Unconstrained energy-efficiency maximizer (continuous).
pub fn nt_ee_closed_form(eps_b: f64, eps_oh: f64, eps_st: f64, p_cw: f64, n: u32) -> f64 {
    stationary_frame_size(eps_oh + eps_st, eps_b, p_cw.ln(), n)
}

/// Unconstrained throughput maximizer (continuous).
pub fn nt_thr_closed_form(t_shr: f64, t_phr: f64, t_sym: f64, p_cw: f64, n: u32) -> f64 {
    stationary_frame_size(t_shr + t_phr, t_sym, p_cw.ln(), n)
}

fn nt_ee(m: &ModeModel) -> f64 {
    stationary_frame_size(
        m.energy.fixed(),
        m.energy.eps_b,
        m.reliability.ln_p_cw,
        m.code_len(),
    )
}

fn nt_thr(m: &ModeModel) -> f64 {
    stationary_frame_size(
        m.t_overhead,
        m.mode.t_sym,
        m.reliability.ln_p_cw,
        m.code_len(),
    )
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        x1
    } else {
        x2
    }
}

/// `(f - lambda (c - R)) / g` in continuous form.
pub fn dual_objective(m: &ModeModel, lambda: f64, required_rate: f64, n_t: f64) -> f64 {
    let delivered = m.eta_continuous(n_t) * m.energy.total(n_t);
    let rate = m.rate_continuous(n_t);
    (delivered - lambda * (required_rate - rate)) / m.energy.total(n_t)
}

/// Continuous maximizer of the dual objective over `grid`.
///
/// The objective need not be unimodal: the `-lambda c / g` term rises
/// towards zero for long frames. A golden-section pass is accepted only if
/// the sampled grid values are unimodal and it beats every sample;
/// otherwise the search is restarted around the best sample.
pub fn dual_inner_argmax(m: &ModeModel, lambda: f64, required_rate: f64, grid: &FrameGrid) -> f64 {
    let phi = |x: f64| dual_objective(m, lambda, required_rate, x);
    let samples: Vec<(u32, f64)> = grid.points().map(|n| (n, phi(f64::from(n)))).collect();
    let (best_idx, &(_, best_val)) = samples
        .iter()
        .enumerate()
        .fold(
            None,
            |acc: Option<(usize, &(u32, f64))>, (i, s)| match acc {
                Some((_, b)) if b.1 >= s.1 => acc,
                _ => Some((i, s)),
            },
        )
        .expect("grid is never empty");
    if samples.len() == 1 {
        return grid.lower();
    }
    let tol = 1e-12;
    if is_unimodal(&samples) {
        let x = golden_section_max(phi, grid.lower(), grid.upper(), tol);
        if phi(x) >= best_val {
            return x;
        }
    }
    let lo = samples[best_idx.saturating_sub(1)].0;
    let hi = samples[(best_idx + 1).min(samples.len() - 1)].0;
    let x = golden_section_max(phi, f64::from(lo), f64::from(hi), tol);
    if phi(x) >= best_val {
        x
    } else {
        f64::from(samples[best_idx].0)
    }
}

fn is_unimodal(samples: &[(u32, f64)]) -> bool {
    let mut falling = false;
    for w in samples.windows(2) {
        let d = w[1].1 - w[0].1;
        if d < 0.0 {
            falling = true;
        } else if d > 0.0 && falling {
            return false;
        }
    }
    true
}

/// Grid maximizer of the dual objective: the continuous maximizer refined
/// by a scan of two codewords either side.
pub fn dual_inner_max(m: &ModeModel, lambda: f64, required_rate: f64, grid: &FrameGrid) -> u32 {
    let x = dual_inner_argmax(m, lambda, required_rate, grid);
    best_by(grid.window(x, 2), |n| {
        dual_objective(m, lambda, required_rate, f64::from(n))
    })
    .expect("window is never empty")
}

fn best_by(points: impl Iterator<Item = u32>, f: impl Fn(u32) -> f64) -> Option<u32> {
    let mut best: Option<(u32, f64)> = None;
    for n in points {
        let v = f(n);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((n, v));
        }
    }
    best.map(|(n, _)| n)
}

/// Projected subgradient step on the multiplier.
pub fn dual_update(lambda: f64, alpha: f64, rate: f64, required_rate: f64) -> f64 {
    (lambda - alpha * (rate - required_rate)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// The efficiency maximizer already meets the throughput floor.
    Unconstrained,
    /// The floor binds; solved through the multiplier.
    Dual,
    /// No frame size meets the floor; the throughput maximizer is used.
    ThroughputFallback,
    /// Reference answer from enumerating every mode and frame size.
    Exhaustive,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Unconstrained => "unconstrained",
            Branch::Dual => "dual",
            Branch::ThroughputFallback => "throughput-fallback",
            Branch::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State of the dual search at termination, in continuous form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualCertificate {
    pub lambda: f64,
    pub n_t: f64,
    pub rate: f64,
    pub subgradient_iterations: u32,
    pub refine_iterations: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub n_cpb: u32,
    pub n_t: u32,
    pub eta: f64,
    pub rate: f64,
    pub p_ppdu: f64,
    pub lambda: f64,
    pub feasible: bool,
    pub branch: Branch,
    pub iterations: u32,
    /// Continuous unconstrained maximizers, before clamping.
    pub n_t_ee: f64,
    pub n_t_thr: f64,
    pub dual: Option<DualCertificate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub distance: f64,
    pub n_t_star: u32,
    pub n_cpb_star: u32,
    pub eta: f64,
    pub rate: f64,
    pub p_ppdu: f64,
    pub lambda: f64,
    pub feasible: bool,
    pub iterations: u32,
    pub branch: Branch,
    /// Per-mode candidates, ascending in `n_cpb`.
    pub modes: Vec<ModeSolution>,
}

impl OptResult {
    pub fn selected(&self) -> &ModeSolution {
        self.modes
            .iter()
            .find(|s| s.n_cpb == self.n_cpb_star)
            .expect("selected mode is present")
    }
}

/// Best frame size for one PHY mode.
pub fn solve_mode(m: &ModeModel, qos: &QosSpec, cfg: &SolverConfig) -> Result<ModeSolution> {
    let c = qos.required_rate();
    let grid = FrameGrid::new(m.code_len(), cfg.n_t_max)?;
    let ee = nt_ee(m);
    let thr = nt_thr(m);
    let n_ee = grid.round_by(grid.clamp(ee), |n| m.eta(n));
    let n_thr = grid.round_by(grid.clamp(thr), |n| m.rate(n));
    let alpha0 = cfg.alpha0.unwrap_or(1.0 / c);
    let lambda0 = alpha0 * (c - m.rate(n_ee)).max(0.0);

    let solution = |n_t: u32, lambda: f64, branch, iterations, dual| {
        let metrics = m.metrics(n_t);
        ModeSolution {
            n_cpb: m.mode.n_cpb,
            n_t,
            eta: metrics.eta,
            rate: metrics.rate,
            p_ppdu: metrics.p_ppdu,
            lambda,
            feasible: metrics.rate >= c,
            branch,
            iterations,
            n_t_ee: ee,
            n_t_thr: thr,
            dual,
        }
    };

    if m.rate(n_ee) >= c {
        return Ok(solution(n_ee, 0.0, Branch::Unconstrained, 0, None));
    }
    if m.rate(n_thr) < c {
        return Ok(solution(
            n_thr,
            lambda0,
            Branch::ThroughputFallback,
            0,
            None,
        ));
    }

    let cert = dual_search(m, c, lambda0, alpha0, grid.clamp(ee), &grid, cfg);
    let n_t = snap_feasible(m, c, cert.n_t, n_thr, &grid);
    let iterations = cert.subgradient_iterations + cert.refine_iterations;
    Ok(solution(
        n_t,
        cert.lambda,
        Branch::Dual,
        iterations,
        Some(cert),
    ))
}

/// Subgradient iterations on the multiplier, then bisection on it.
///
/// The sign of `R(n(lambda)) - c` is monotone in `lambda`, so every probe
/// tightens a bracket around the optimal multiplier; the bisection finishes
/// on the feasible side.
fn dual_search(
    m: &ModeModel,
    c: f64,
    lambda0: f64,
    alpha0: f64,
    n_start: f64,
    grid: &FrameGrid,
    cfg: &SolverConfig,
) -> DualCertificate {
    let mut lo = 0.0f64;
    let mut hi: Option<(f64, f64)> = None;
    let probe = |lambda: f64, lo: &mut f64, hi: &mut Option<(f64, f64)>| {
        let x = dual_inner_argmax(m, lambda, c, grid);
        let r = m.rate_continuous(x);
        if r >= c {
            if hi.is_none_or(|(h, _)| lambda < h) {
                *hi = Some((lambda, x));
            }
        } else {
            *lo = lo.max(lambda);
        }
        (x, r)
    };

    let mut lambda = lambda0;
    let mut n_prev = n_start;
    let mut subgradient_iterations = 0;
    for l in 0..cfg.max_iter {
        let (x, r) = probe(lambda, &mut lo, &mut hi);
        subgradient_iterations += 1;
        lambda = dual_update(lambda, cfg.step(alpha0, l), r, c);
        let converged = (x - n_prev).abs() <= cfg.delta * n_prev;
        n_prev = x;
        if converged {
            break;
        }
    }

    let mut refine_iterations = 0;
    let mut step = lo.max(alpha0).max(f64::MIN_POSITIVE);
    while hi.is_none() && refine_iterations < 2 * cfg.max_iter {
        probe(lo + step, &mut lo, &mut hi);
        step *= 2.0;
        refine_iterations += 1;
    }
    let Some(mut upper) = hi else {
        let x = n_prev;
        return DualCertificate {
            lambda,
            n_t: x,
            rate: m.rate_continuous(x),
            subgradient_iterations,
            refine_iterations,
        };
    };
    while refine_iterations < 2 * cfg.max_iter {
        let slack = m.rate_continuous(upper.1) - c;
        if slack <= cfg.refine_tol * c || upper.0 - lo <= 1e-15 * upper.0 {
            break;
        }
        let mid = 0.5 * (lo + upper.0);
        probe(mid, &mut lo, &mut hi);
        upper = hi.expect("bracket keeps a feasible end");
        refine_iterations += 1;
    }
    DualCertificate {
        lambda: upper.0,
        n_t: upper.1,
        rate: m.rate_continuous(upper.1),
        subgradient_iterations,
        refine_iterations,
    }
}

/// Most efficient feasible grid point near `x`; if none is close, step
/// from `x` towards the (feasible) throughput maximizer.
fn snap_feasible(m: &ModeModel, c: f64, x: f64, n_thr: u32, grid: &FrameGrid) -> u32 {
    let near = best_by(grid.window(x, 2).filter(|&n| m.rate(n) >= c), |n| m.eta(n));
    if let Some(n) = near {
        return n;
    }
    let (lo, hi) = grid.neighbours(x);
    let mut n = if n_thr < lo { lo } else { hi };
    while n != n_thr && m.rate(n) < c {
        n = if n_thr < n {
            n - grid.step
        } else {
            n + grid.step
        };
    }
    n
}

/// Feasible beats infeasible; then higher efficiency, or higher rate when
/// nothing is feasible. Ties keep the earlier candidate.
fn better(candidate: (bool, f64, f64), incumbent: (bool, f64, f64)) -> bool {
    let (feas, eta, rate) = candidate;
    let (inc_feas, inc_eta, inc_rate) = incumbent;
    match (feas, inc_feas) {
        (true, false) => true,
        (false, true) => false,
        (true, true) => eta > inc_eta,
        (false, false) => rate > inc_rate,
    }
}

fn select(solutions: &[ModeSolution]) -> usize {
    let mut best = 0;
    for (i, s) in solutions.iter().enumerate().skip(1) {
        let b = &solutions[best];
        if better((s.feasible, s.eta, s.rate), (b.feasible, b.eta, b.rate)) {
            best = i;
        }
    }
    best
}

fn assemble(distance: f64, modes: Vec<ModeSolution>, branch: Option<Branch>) -> OptResult {
    let s = modes[select(&modes)];
    OptResult {
        distance,
        n_t_star: s.n_t,
        n_cpb_star: s.n_cpb,
        eta: s.eta,
        rate: s.rate,
        p_ppdu: s.p_ppdu,
        lambda: s.lambda,
        feasible: s.feasible,
        iterations: s.iterations,
        branch: branch.unwrap_or(s.branch),
        modes,
    }
}

/// Solve every mode of a link in parallel and pick the best.
pub fn cloee_on(
    models: &[ModeModel],
    distance: f64,
    qos: &QosSpec,
    cfg: &SolverConfig,
) -> Result<OptResult> {
    qos.validate()?;
    cfg.validate()?;
    if models.is_empty() {
        return Err(ModelError::Domain {
            name: "modes",
            value: 0.0,
            reason: "at least one PHY mode is required",
        });
    }
    let modes = models
        .par_iter()
        .map(|m| solve_mode(m, qos, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(distance, modes, None))
}

pub fn cloee(
    system: &SystemModel,
    distance: f64,
    chi: f64,
    qos: &QosSpec,
    cfg: &SolverConfig,
) -> Result<OptResult> {
    cloee_on(&system.mode_models(distance, chi)?, distance, qos, cfg)
}

/// Best grid point of one mode under the same selection rule.
fn exhaustive_mode(m: &ModeModel, c: f64, cfg: &SolverConfig) -> Result<ModeSolution> {
    let grid = FrameGrid::new(m.code_len(), cfg.n_t_max)?;
    let mut best: Option<(u32, (bool, f64, f64))> = None;
    for n in grid.points() {
        let rate = m.rate(n);
        let key = (rate >= c, m.eta(n), rate);
        if best.is_none_or(|(_, b)| better(key, b)) {
            best = Some((n, key));
        }
    }
    let (n_t, (feasible, eta, rate)) = best.expect("grid is never empty");
    Ok(ModeSolution {
        n_cpb: m.mode.n_cpb,
        n_t,
        eta,
        rate,
        p_ppdu: m.p_ppdu(n_t),
        lambda: 0.0,
        feasible,
        branch: Branch::Exhaustive,
        iterations: grid.len(),
        n_t_ee: nt_ee(m),
        n_t_thr: nt_thr(m),
        dual: None,
    })
}

/// Enumerate every mode and codeword-aligned frame size.
pub fn exhaustive_on(
    models: &[ModeModel],
    distance: f64,
    qos: &QosSpec,
    cfg: &SolverConfig,
) -> Result<OptResult> {
    qos.validate()?;
    cfg.validate()?;
    if models.is_empty() {
        return Err(ModelError::Domain {
            name: "modes",
            value: 0.0,
            reason: "at least one PHY mode is required",
        });
    }
    let c = qos.required_rate();
    let modes = models
        .par_iter()
        .map(|m| exhaustive_mode(m, c, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble(distance, modes, Some(Branch::Exhaustive)))
}

pub fn exhaustive_search(
    system: &SystemModel,
    distance: f64,
    chi: f64,
    qos: &QosSpec,
    cfg: &SolverConfig,
) -> Result<OptResult> {
    exhaustive_on(&system.mode_models(distance, chi)?, distance, qos, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::PhyMode;
    use crate::metrics::stationarity_polynomial;
    use crate::reliability::BitErrorProfile;

    fn model(p_b: f64, n_cpb: u32) -> ModeModel {
        SystemModel::default().mode_model_with_profile(
            &BitErrorProfile::uniform(p_b),
            PhyMode::from_n_cpb(n_cpb).unwrap(),
        )
    }

    #[test]
    fn grid_geometry() {
        let g = FrameGrid::new(63, 8190).unwrap();
        assert_eq!((g.top, g.len()), (8190, 130));
        assert_eq!(FrameGrid::new(63, 8200).unwrap().top, 8190);
        assert!(FrameGrid::new(63, 62).is_err());
        assert_eq!(g.neighbours(100.0), (63, 126));
        assert_eq!(g.neighbours(126.0), (126, 126));
        assert_eq!(g.neighbours(1.0), (63, 63));
        assert_eq!(g.neighbours(1e9), (8190, 8190));
        assert_eq!(
            g.window(100.0, 2).collect::<Vec<_>>(),
            vec![63, 126, 189, 252]
        );
        assert_eq!(
            g.window(8100.0, 2).collect::<Vec<_>>(),
            vec![7938, 8001, 8064, 8127, 8190]
        );
    }

    #[test]
    fn closed_form_is_a_stationary_point() {
        for (p_b, n_cpb) in [(1e-3, 1), (3e-4, 2), (1e-2, 32), (1e-6, 4)] {
            let m = model(p_b, n_cpb);
            let ln_p = m.reliability.ln_p_cw;
            let n = nt_ee(&m);
            let beta = stationarity_polynomial(n, m.energy.eps_b, m.energy.fixed(), ln_p, 63);
            assert!(
                beta.abs() <= 1e-9 * m.energy.fixed(),
                "{p_b} {n_cpb} {beta}"
            );
            assert!(m.eta_gradient(n).abs() * n <= 1e-9 * m.eta_continuous(n));
            let t = nt_thr(&m);
            let beta = stationarity_polynomial(t, m.mode.t_sym, m.t_overhead, ln_p, 63);
            assert!(beta.abs() <= 1e-9 * m.t_overhead);
        }
    }

    #[test]
    fn closed_form_matches_the_textbook_root() {
        let m = model(1e-3, 4);
        let p = m.reliability.p_cw;
        let (eb, e1) = (m.energy.eps_b, m.energy.fixed());
        let textbook = (-e1 + (e1 * e1 - 4.0 * eb * e1 * 63.0 / p.ln()).sqrt()) / (2.0 * eb);
        let stable = nt_ee_closed_form(eb, m.energy.eps_oh, m.energy.eps_st, p, 63);
        assert!(((stable - textbook) / textbook).abs() < 1e-12);
    }

    #[test]
    fn closed_form_survives_nearly_perfect_codewords() {
        // ln p_cw around -1e-30: the textbook form cancels to zero.
        let n = stationary_frame_size(3.3e-5, 6e-10, -1e-30, 63);
        let expected = (63.0 * 3.3e-5 / (6e-10 * 1e-30f64)).sqrt();
        assert!(((n - expected) / expected).abs() < 1e-6);
        assert_eq!(stationary_frame_size(1.0, 1.0, 0.0, 63), f64::INFINITY);
        assert_eq!(stationary_frame_size(1.0, 1.0, f64::NEG_INFINITY, 63), 0.0);
    }

    #[test]
    fn efficiency_maximizer_beats_its_neighbourhood() {
        let m = model(5e-4, 2);
        let n = nt_ee(&m);
        let best = m.eta_continuous(n);
        for k in 1..200 {
            let d = f64::from(k);
            assert!(m.eta_continuous(n + d) <= best && m.eta_continuous(n - d) <= best);
        }
    }

    #[test]
    fn golden_section_finds_a_parabola_peak() {
        let x = golden_section_max(|x| -(x - 3.7) * (x - 3.7), 0.0, 10.0, 1e-12);
        assert!((x - 3.7).abs() < 1e-6);
    }

    #[test]
    fn dual_update_projects_onto_nonnegatives() {
        assert_eq!(dual_update(1.0, 0.5, 4.0, 2.0), 0.0);
        assert_eq!(dual_update(1.0, 0.5, 1.0, 2.0), 1.5);
        assert_eq!(dual_update(0.0, 1.0, 3.0, 2.0), 0.0);
    }

    #[test]
    fn dual_inner_limits() {
        let m = model(1e-3, 2);
        let grid = FrameGrid::new(63, 8190).unwrap();
        let c = QosSpec::default().required_rate();
        let x0 = dual_inner_argmax(&m, 0.0, c, &grid);
        let ee = grid.clamp(nt_ee(&m));
        assert!(((x0 - ee) / ee).abs() < 1e-6, "{x0} vs {ee}");
        // A huge multiplier leaves only the rate-per-energy term.
        let x_inf = dual_inner_argmax(&m, 1e6, c, &grid);
        let pure = golden_section_max(
            |x| (m.rate_continuous(x) - c) / m.energy.total(x),
            63.0,
            8190.0,
            1e-12,
        );
        assert!(((x_inf - pure) / pure).abs() < 1e-5, "{x_inf} vs {pure}");
    }

    #[test]
    fn error_free_link_uses_the_longest_frame_and_fastest_mode() {
        let models: Vec<_> = PhyMode::all()
            .into_iter()
            .map(|m| {
                SystemModel::default().mode_model_with_profile(&BitErrorProfile::uniform(0.0), m)
            })
            .collect();
        let r = cloee_on(&models, 1.0, &QosSpec::default(), &SolverConfig::default()).unwrap();
        assert_eq!((r.n_cpb_star, r.n_t_star), (1, 8190));
        assert_eq!(r.branch, Branch::Unconstrained);
        assert_eq!(r.lambda, 0.0);
    }

    #[test]
    fn tiny_grid_has_two_points() {
        let cfg = SolverConfig {
            n_t_max: 126,
            ..Default::default()
        };
        let sys = SystemModel::default();
        let qos = QosSpec::default();
        let r = cloee(&sys, 1.0, 0.0, &qos, &cfg).unwrap();
        let o = exhaustive_search(&sys, 1.0, 0.0, &qos, &cfg).unwrap();
        assert!(r.n_t_star == 63 || r.n_t_star == 126);
        assert_eq!(r.eta, o.eta);
    }

    #[test]
    fn binding_floor_goes_through_the_dual() {
        // At 6.5 m the efficiency optimum of the slowest mode is below the floor.
        let sys = SystemModel::default();
        let m = sys
            .mode_model(
                &sys.link(6.5, 0.0).unwrap(),
                PhyMode::from_n_cpb(32).unwrap(),
            )
            .unwrap();
        let qos = QosSpec::default();
        let c = qos.required_rate();
        let cfg = SolverConfig::default();
        let grid = FrameGrid::new(63, cfg.n_t_max).unwrap();
        let n_ee = grid.round_by(nt_ee(&m), |n| m.eta(n));
        assert!(m.rate(n_ee) < c, "test premise: rate {}", m.rate(n_ee));
        let s = solve_mode(&m, &qos, &cfg).unwrap();
        assert_eq!(s.branch, Branch::Dual);
        assert!(s.feasible && s.lambda > 0.0);
        let cert = s.dual.unwrap();
        assert!((cert.rate - c).abs() <= 1e-6 * c);
        let best = grid
            .points()
            .filter(|&n| m.rate(n) >= c)
            .map(|n| m.eta(n))
            .fold(0.0, f64::max);
        assert_eq!(s.eta, best);
    }

    #[test]
    fn infeasible_mode_falls_back_to_throughput() {
        let m = model(5e-2, 1);
        let s = solve_mode(&m, &QosSpec::default(), &SolverConfig::default()).unwrap();
        assert_eq!(s.branch, Branch::ThroughputFallback);
        assert!(!s.feasible);
        assert_eq!(s.n_t, 63);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig {
            alpha0: Some(0.0),
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            max_iter: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            delta: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert_eq!(
            Branch::ThroughputFallback.to_string(),
            "throughput-fallback"
        );
    }
}
