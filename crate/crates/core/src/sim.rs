//! Distance sweeps comparing the optimizer, the exhaustive reference and
//! fixed (n_cpb, n_t) strategies, plus per-mode frame-size curves.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::ShadowingSampler;
use crate::error::{ModelError, Result};
use crate::frame::PhyMode;
use crate::metrics::{ModeModel, QosSpec, SystemModel};
use crate::optimizer::{
    cloee_on, exhaustive_on, solve_mode, Branch, FrameGrid, OptResult, SolverConfig,
};

/// A fixed PHY mode and PSDU size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticStrategy {
    pub n_cpb: u32,
    pub n_t: u32,
}

impl StaticStrategy {
    pub const fn new(n_cpb: u32, n_t: u32) -> Self {
        StaticStrategy { n_cpb, n_t }
    }

    pub fn validate(&self) -> Result<()> {
        PhyMode::from_n_cpb(self.n_cpb)?;
        if self.n_t < 63 {
            return Err(ModelError::InvalidFrame {
                n_t: self.n_t,
                n: 63,
            });
        }
        Ok(())
    }
}

pub const DEFAULT_STRATEGIES: [StaticStrategy; 5] = [
    StaticStrategy::new(1, 2616),
    StaticStrategy::new(2, 2616),
    StaticStrategy::new(4, 2616),
    StaticStrategy::new(8, 2616),
    StaticStrategy::new(32, 2616),
];

/// Which frame-size curve marker a row carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Marker {
    /// Unconstrained efficiency maximizer.
    Ee,
    /// Unconstrained throughput maximizer.
    Thr,
    /// Constrained solution of the mode.
    Star,
}

/// Row label. Orders as optimizer, reference, static strategies, then curve rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrategyId {
    Cloee,
    Oracle,
    Static(StaticStrategy),
    /// One point of a mode's frame-size curve.
    Curve(u32),
    Marker(Marker),
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategyId::Cloee => f.write_str("cloee"),
            StrategyId::Oracle => f.write_str("oracle"),
            StrategyId::Static(s) => write!(f, "static-{}-{}", s.n_cpb, s.n_t),
            StrategyId::Curve(n_cpb) => write!(f, "curve-{n_cpb}"),
            StrategyId::Marker(Marker::Ee) => f.write_str("nt-ee"),
            StrategyId::Marker(Marker::Thr) => f.write_str("nt-thr"),
            StrategyId::Marker(Marker::Star) => f.write_str("nt-star"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognised strategy id `{0}`")]
pub struct ParseStrategyError(String);

impl FromStr for StrategyId {
    type Err = ParseStrategyError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let err = || ParseStrategyError(s.to_string());
        Ok(match s {
            "cloee" => StrategyId::Cloee,
            "oracle" => StrategyId::Oracle,
            "nt-ee" => StrategyId::Marker(Marker::Ee),
            "nt-thr" => StrategyId::Marker(Marker::Thr),
            "nt-star" => StrategyId::Marker(Marker::Star),
            _ => {
                if let Some(rest) = s.strip_prefix("static-") {
                    let (n_cpb, n_t) = rest.split_once('-').ok_or_else(err)?;
                    StrategyId::Static(StaticStrategy {
                        n_cpb: n_cpb.parse().map_err(|_| err())?,
                        n_t: n_t.parse().map_err(|_| err())?,
                    })
                } else if let Some(n_cpb) = s.strip_prefix("curve-") {
                    StrategyId::Curve(n_cpb.parse().map_err(|_| err())?)
                } else {
                    return Err(err());
                }
            }
        })
    }
}

impl Serialize for StrategyId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StrategyId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One output row. Static and curve rows carry no branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub distance: f64,
    pub strategy: StrategyId,
    pub n_cpb: u32,
    pub n_t: u32,
    #[serde(rename = "eta_bits_per_joule")]
    pub eta: f64,
    #[serde(rename = "rate_bps")]
    pub rate: f64,
    pub p_ppdu: f64,
    pub feasible: bool,
    pub branch: Option<Branch>,
}

impl SweepRow {
    pub fn from_result(strategy: StrategyId, r: &OptResult) -> Self {
        SweepRow {
            distance: r.distance,
            strategy,
            n_cpb: r.n_cpb_star,
            n_t: r.n_t_star,
            eta: r.eta,
            rate: r.rate,
            p_ppdu: r.p_ppdu,
            feasible: r.feasible,
            branch: Some(r.branch),
        }
    }

    fn evaluated(
        distance: f64,
        strategy: StrategyId,
        m: &ModeModel,
        n_t: u32,
        required_rate: f64,
    ) -> Self {
        let metrics = m.metrics(n_t);
        SweepRow {
            distance,
            strategy,
            n_cpb: m.mode.n_cpb,
            n_t,
            eta: metrics.eta,
            rate: metrics.rate,
            p_ppdu: metrics.p_ppdu,
            feasible: metrics.rate >= required_rate,
            branch: None,
        }
    }
}

/// Everything a sweep needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub system: SystemModel,
    pub qos: QosSpec,
    pub solver: SolverConfig,
    pub distances: Vec<f64>,
    pub strategies: Vec<StaticStrategy>,
    pub seed: u64,
    pub shadowing: bool,
    /// Distance of the frame-size curves.
    pub curve_distance: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            system: SystemModel::default(),
            qos: QosSpec::default(),
            solver: SolverConfig::default(),
            distances: distance_grid(1.0, 10.0, 0.1),
            strategies: DEFAULT_STRATEGIES.to_vec(),
            seed: 0,
            shadowing: false,
            curve_distance: 8.4,
        }
    }
}

/// `start, start + step, ..., stop`, each rounded to 12 decimals so that
/// e.g. 1.3 is the literal 1.3 rather than `1.0 + 3 * 0.1`.
pub fn distance_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if step.is_nan() || step <= 0.0 || stop < start {
        return vec![start];
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect()
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.qos.validate()?;
        self.solver.validate()?;
        if self.distances.is_empty() {
            return Err(ModelError::Domain {
                name: "sweep.distances",
                value: 0.0,
                reason: "must not be empty",
            });
        }
        for &d in self
            .distances
            .iter()
            .chain(std::iter::once(&self.curve_distance))
        {
            if !(d > 0.0 && d.is_finite()) {
                return Err(ModelError::Domain {
                    name: "sweep.distances",
                    value: d,
                    reason: "must be finite and > 0",
                });
            }
        }
        self.strategies
            .iter()
            .try_for_each(StaticStrategy::validate)
    }

    fn sampler(&self) -> Result<Option<ShadowingSampler>> {
        if self.shadowing {
            Ok(Some(ShadowingSampler::new(
                self.seed,
                self.system.channel.sigma,
            )?))
        } else {
            Ok(None)
        }
    }

    /// Shadowing draw for sweep point `index`, or zero when disabled.
    pub fn shadowing_at(&self, index: usize) -> Result<f64> {
        Ok(self.sampler()?.map_or(0.0, |s| s.sample(index as u64)))
    }
}

/// Evaluate the optimizer, the exhaustive reference and every static
/// strategy at every distance. Rows are sorted by (distance, strategy).
pub fn run_sweep(scenario: &Scenario) -> Result<Vec<SweepRow>> {
    scenario.validate()?;
    let sampler = scenario.sampler()?;
    let c = scenario.qos.required_rate();
    let per_distance = scenario
        .distances
        .par_iter()
        .enumerate()
        .map(|(i, &d)| {
            let chi = sampler.as_ref().map_or(0.0, |s| s.sample(i as u64));
            let models = scenario.system.mode_models(d, chi)?;
            let mut rows = vec![
                SweepRow::from_result(
                    StrategyId::Cloee,
                    &cloee_on(&models, d, &scenario.qos, &scenario.solver)?,
                ),
                SweepRow::from_result(
                    StrategyId::Oracle,
                    &exhaustive_on(&models, d, &scenario.qos, &scenario.solver)?,
                ),
            ];
            for s in &scenario.strategies {
                let m = models
                    .iter()
                    .find(|m| m.mode.n_cpb == s.n_cpb)
                    .ok_or(ModelError::UnknownMode(s.n_cpb))?;
                rows.push(SweepRow::evaluated(d, StrategyId::Static(*s), m, s.n_t, c));
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<SweepRow> = per_distance.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.strategy.cmp(&b.strategy))
    });
    rows.dedup_by(|a, b| a.distance == b.distance && a.strategy == b.strategy);
    Ok(rows)
}

/// Efficiency and throughput against frame size for every mode at
/// `scenario.curve_distance`, followed by each mode's marker rows.
pub fn run_curves(scenario: &Scenario) -> Result<Vec<SweepRow>> {
    scenario.validate()?;
    let d = scenario.curve_distance;
    let c = scenario.qos.required_rate();
    let models = scenario.system.mode_models(d, scenario.shadowing_at(0)?)?;
    let mut rows = Vec::new();
    for m in &models {
        let grid = FrameGrid::new(m.code_len(), scenario.solver.n_t_max)?;
        rows.extend(
            grid.points()
                .map(|n| SweepRow::evaluated(d, StrategyId::Curve(m.mode.n_cpb), m, n, c)),
        );
    }
    for m in &models {
        let grid = FrameGrid::new(m.code_len(), scenario.solver.n_t_max)?;
        let s = solve_mode(m, &scenario.qos, &scenario.solver)?;
        let n_ee = grid.round_by(grid.clamp(s.n_t_ee), |n| m.eta(n));
        let n_thr = grid.round_by(grid.clamp(s.n_t_thr), |n| m.rate(n));
        for (marker, n_t) in [
            (Marker::Ee, n_ee),
            (Marker::Thr, n_thr),
            (Marker::Star, s.n_t),
        ] {
            let mut row = SweepRow::evaluated(d, StrategyId::Marker(marker), m, n_t, c);
            if marker == Marker::Star {
                row.branch = Some(s.branch);
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Rows of one strategy, in the order given.
pub fn rows_for(rows: &[SweepRow], strategy: StrategyId) -> Vec<SweepRow> {
    rows.iter()
        .filter(|r| r.strategy == strategy)
        .copied()
        .collect()
}

/// Largest distance at which every row of `strategy` up to it is feasible.
pub fn feasibility_limit(rows: &[SweepRow], strategy: StrategyId) -> Option<f64> {
    let mut limit = None;
    for r in rows_for(rows, strategy) {
        if !r.feasible {
            break;
        }
        limit = Some(r.distance);
    }
    limit
}

pub fn compare_distance(a: &SweepRow, b: &SweepRow) -> Ordering {
    a.distance.total_cmp(&b.distance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_ids_round_trip() {
        let ids = [
            StrategyId::Cloee,
            StrategyId::Oracle,
            StrategyId::Static(StaticStrategy::new(32, 2616)),
            StrategyId::Curve(16),
            StrategyId::Marker(Marker::Ee),
            StrategyId::Marker(Marker::Thr),
            StrategyId::Marker(Marker::Star),
        ];
        for id in ids {
            assert_eq!(id.to_string().parse::<StrategyId>().unwrap(), id);
        }
        assert!("static-32".parse::<StrategyId>().is_err());
        assert!("fastest".parse::<StrategyId>().is_err());
        assert!(StrategyId::Cloee < StrategyId::Oracle);
        assert!(StrategyId::Oracle < StrategyId::Static(StaticStrategy::new(1, 63)));
    }

    #[test]
    fn distance_grid_hits_decimal_points() {
        let g = distance_grid(1.0, 10.0, 0.1);
        assert_eq!(g.len(), 91);
        assert_eq!(g[3], 1.3);
        assert_eq!(g[90], 10.0);
        assert!(g
            .iter()
            .enumerate()
            .all(|(i, &d)| d == (10.0 + i as f64) / 10.0));
        assert_eq!(distance_grid(2.0, 2.0, 0.5), vec![2.0]);
    }

    #[test]
    fn one_distance_one_strategy_gives_three_rows() {
        let scenario = Scenario {
            distances: vec![3.0],
            strategies: vec![StaticStrategy::new(32, 2616)],
            ..Default::default()
        };
        let rows = run_sweep(&scenario).unwrap();
        assert_eq!(rows.len(), 3);
        let ids: Vec<_> = rows.iter().map(|r| r.strategy).collect();
        assert_eq!(
            ids,
            vec![
                StrategyId::Cloee,
                StrategyId::Oracle,
                StrategyId::Static(StaticStrategy::new(32, 2616))
            ]
        );
        assert!(rows[2].branch.is_none());
    }

    #[test]
    fn default_sweep_row_count() {
        let rows = run_sweep(&Scenario::default()).unwrap();
        assert_eq!(rows.len(), 91 * 7);
        assert!(rows
            .windows(2)
            .all(|w| compare_distance(&w[0], &w[1]).is_le()));
    }

    #[test]
    fn scenario_validation() {
        let base = Scenario::default();
        assert!(Scenario {
            distances: vec![],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(Scenario {
            distances: vec![-1.0],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(Scenario {
            strategies: vec![StaticStrategy::new(3, 2616)],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(Scenario {
            strategies: vec![StaticStrategy::new(4, 62)],
            ..base.clone()
        }
        .validate()
        .is_err());
        assert!(base.validate().is_ok());
    }

    #[test]
    fn shadowing_is_seeded_and_per_point() {
        let on = Scenario {
            shadowing: true,
            seed: 7,
            distances: vec![2.0, 4.0],
            ..Default::default()
        };
        assert_eq!(on.shadowing_at(1).unwrap(), on.shadowing_at(1).unwrap());
        assert_ne!(on.shadowing_at(0).unwrap(), on.shadowing_at(1).unwrap());
        assert_eq!(Scenario::default().shadowing_at(3).unwrap(), 0.0);
        let a = run_sweep(&on).unwrap();
        let b = run_sweep(&Scenario {
            shadowing: false,
            ..on.clone()
        })
        .unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn curves_cover_every_mode_with_markers() {
        let rows = run_curves(&Scenario::default()).unwrap();
        assert_eq!(rows.len(), 6 * 130 + 6 * 3);
        let stars: Vec<_> = rows
            .iter()
            .filter(|r| r.strategy == StrategyId::Marker(Marker::Star))
            .collect();
        assert_eq!(stars.len(), 6);
        assert!(stars.iter().all(|r| r.branch.is_some()));
    }
}
